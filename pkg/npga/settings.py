"""
Runtime settings shared by the CLI and the grid runner.

Values come from the environment (a `.env` file is honoured through
python-dotenv) and can be overridden at runtime, e.g. from CLI flags.
"""

import os
from threading import Lock
from typing import Any, Dict

from dotenv import load_dotenv

load_dotenv()

_DEFAULTS = {
    "log_level": "INFO",
    "max_workers": 1,
    "output_dir": "runs",
}

_runtime_settings = {
    "log_level": os.environ.get("NPGA_LOG_LEVEL", _DEFAULTS["log_level"]).upper(),
    "max_workers": int(os.environ.get("NPGA_MAX_WORKERS", _DEFAULTS["max_workers"])),
    "output_dir": os.environ.get("NPGA_OUTPUT_DIR", _DEFAULTS["output_dir"]),
}

_settings_lock = Lock()


def get_runtime_settings() -> Dict[str, Any]:
    """Get a copy of the runtime settings."""
    with _settings_lock:
        return _runtime_settings.copy()


def set_runtime_setting(name: str, value: Any) -> None:
    """Override one runtime setting."""
    if name not in _DEFAULTS:
        raise KeyError(f"Unknown runtime setting: {name}")
    with _settings_lock:
        if name == "max_workers":
            value = max(1, int(value))
        elif name == "log_level":
            value = str(value).upper()
        _runtime_settings[name] = value


def get_max_workers() -> int:
    with _settings_lock:
        return _runtime_settings["max_workers"]


def get_log_level() -> str:
    with _settings_lock:
        return _runtime_settings["log_level"]


def get_output_dir() -> str:
    with _settings_lock:
        return _runtime_settings["output_dir"]
