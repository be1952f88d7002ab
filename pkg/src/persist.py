"""
Serialization helpers for run output.

Used by the CLI to write JSON reports and JSON Lines derivation traces.
"""

import json
import logging
from pathlib import Path
from typing import IO, Optional

from src.models import RunReport, TraceEvent

logger = logging.getLogger(__name__)


def report_to_json(report: RunReport) -> str:
    """Render a run report as a JSON object with keys in a fixed order."""
    return json.dumps(report.to_dict(), ensure_ascii=False)


class JsonlTraceWriter:
    """
    Trace sink that writes one JSON object per derivation step.

    Use as a context manager; the instance itself is the callable passed as
    ExecConfig.trace_sink.
    """

    def __init__(self, path: Path):
        self.path = Path(path)
        self.events_written = 0
        self._file: Optional[IO[str]] = None

    def __enter__(self) -> "JsonlTraceWriter":
        self._file = open(self.path, "w", encoding="utf-8", newline="\n")
        return self

    def __call__(self, event: TraceEvent) -> None:
        if self._file is None:
            raise RuntimeError("Trace writer is not open")
        self._file.write(json.dumps(event.to_dict(), ensure_ascii=False) + "\n")
        self.events_written += 1

    def __exit__(self, exc_type, exc, tb) -> None:
        if self._file is not None:
            self._file.close()
            self._file = None
        logger.info(f"Wrote {self.events_written} trace event(s) to {self.path}")
