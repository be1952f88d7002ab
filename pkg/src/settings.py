"""
Settings loader for the choose toolkit.

Reads configuration from settings.toml in the project root.
Environment variables override TOML values (12-factor style):
  CHOOSE_MAX_DEPTH  → [engine].max_depth
  CHOOSE_LOG_LEVEL  → [logging].level
"""

import os
import tomllib
import logging
from pathlib import Path
from typing import Any, Optional

logger = logging.getLogger(__name__)

# Resolve settings.toml relative to this file's location (src/ -> project root)
_SETTINGS_PATH = Path(__file__).parent.parent / "settings.toml"

_settings: Optional[dict] = None

# Map (section, key) → environment variable name
_ENV_OVERRIDES: dict[tuple[str, str], str] = {
    ("engine", "max_depth"): "CHOOSE_MAX_DEPTH",
    ("logging", "level"): "CHOOSE_LOG_LEVEL",
}


def load_settings() -> dict:
    """Load settings from settings.toml. Returns cached result after first load."""
    global _settings
    if _settings is not None:
        return _settings

    if not _SETTINGS_PATH.exists():
        logger.debug(f"settings.toml not found at {_SETTINGS_PATH}; using defaults")
        _settings = {}
        return _settings

    with open(_SETTINGS_PATH, "rb") as f:
        _settings = tomllib.load(f)

    return _settings


def reset() -> None:
    """Forget the cached settings so the next lookup re-reads the file."""
    global _settings
    _settings = None


def get(section: str, key: str, default: Any = None) -> Any:
    """Get a value from settings by section and key.

    Checks the environment variable override first (e.g. CHOOSE_MAX_DEPTH for
    [engine].max_depth), then falls back to settings.toml, then to *default*.
    """
    env_var = _ENV_OVERRIDES.get((section.lower(), key.lower()))
    if env_var:
        env_value = os.environ.get(env_var)
        if env_value is not None:
            return env_value

    settings = load_settings()
    return settings.get(section, {}).get(key, default)


def max_depth(default: int) -> int:
    """[engine].max_depth as a positive int.

    Raises:
        ValueError: If the configured value is not an integer of at least 1
    """
    configured = get("engine", "max_depth", default)
    try:
        value = int(configured)
    except (TypeError, ValueError):
        raise ValueError(f"Invalid [engine].max_depth setting: {configured!r}")
    if value < 1:
        raise ValueError(f"Invalid [engine].max_depth setting: {value}")
    return value


def log_level(default: str = "WARNING") -> str:
    """[logging].level, upper-cased; an unknown level name falls back to *default*."""
    level = str(get("logging", "level", default)).upper()
    if level not in logging.getLevelNamesMapping():
        logger.warning(f"Unknown [logging].level {level!r}; using {default}")
        return default
    return level
