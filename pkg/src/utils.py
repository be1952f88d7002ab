"""
Utility functions for choose-language tooling.

Contains helpers for logging setup, source file handling and the textual
rendering of values shared by the printer, the state serializer and the CLI.
"""

import difflib
import logging
from enum import Enum
from pathlib import Path
from typing import List, Optional, Sequence, Union

logger = logging.getLogger(__name__)

_ESCAPES = {'"': '\\"', "\\": "\\\\", "\n": "\\n"}


def setup_logging(level: Union[int, str] = logging.WARNING, log_file: Optional[str] = None):
    """
    Setup logging configuration.

    Args:
        level: Logging level, as a number or a name such as "DEBUG"
        log_file (str, optional): Path to log file
    """
    if isinstance(level, str):
        level = logging.getLevelName(level.upper())
        if not isinstance(level, int):
            level = logging.WARNING

    handlers: List[logging.Handler] = [logging.StreamHandler()]
    if log_file:
        handlers.append(logging.FileHandler(log_file))

    logging.basicConfig(
        level=level,
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        handlers=handlers
    )


class SourceKind(Enum):
    """Kinds of source files the toolkit reads."""
    CHOOSE = ".ch"
    MINI_JAVA = ".mj"


def source_kind(file_path: Path) -> Optional[SourceKind]:
    """
    Identify a source file by its extension.

    Args:
        file_path (Path): Path to file

    Returns:
        SourceKind: The kind of source, or None for unknown extensions
    """
    suffix = file_path.suffix.lower()
    for kind in SourceKind:
        if kind.value == suffix:
            return kind
    return None


def read_source(file_path: Path) -> str:
    """
    Read a UTF-8 source file; line endings are normalized to "\\n".

    Args:
        file_path (Path): Path to the source file

    Returns:
        str: File contents
    """
    logger.debug(f"Reading source file: {file_path}")
    with open(file_path, 'r', encoding='utf-8') as f:
        return f.read()


def escape_string(text: str) -> str:
    """Quote a string using the surface syntax escapes \\" \\\\ and \\n."""
    return '"' + ''.join(_ESCAPES.get(ch, ch) for ch in text) + '"'


def render_value(value) -> str:
    """
    Render a runtime value as surface text.

    Integers print in decimal, strings quoted, booleans as true/false.
    """
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, str):
        return escape_string(value)
    raise TypeError(f"Cannot render {value!r}")


def format_failure(codes: Sequence[str]) -> str:
    """Format the failure line printed by the CLI, e.g. FAIL [a, b]."""
    return f"FAIL [{', '.join(codes)}]"


def state_diff(left: Sequence[str], right: Sequence[str]) -> List[str]:
    """
    Line diff of two rendered states.

    Returns:
        list: Lines prefixed with "- " (only in left) or "+ " (only in right)
    """
    return [
        line for line in difflib.ndiff(list(left), list(right))
        if line.startswith(("- ", "+ "))
    ]
