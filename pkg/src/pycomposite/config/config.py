import json
import multiprocessing
import os
from pathlib import Path
from typing import Any

import typer

CONFIG_DIR = Path(
    os.environ.get("PYCOMPOSITE_CONFIG_DIR") or typer.get_app_dir("pycomposite")
)
CONFIG_FILE = CONFIG_DIR / "config.json"

default_config: dict[str, Any] = {
    "method": "rk45",
    "rtol": 1e-10,
    "atol": 1e-12,
    "step": 1e-3,
    "t_end": 10.0,
    "max_steps": 2_000_000,
    "workers": multiprocessing.cpu_count(),
    "pass_tolerance": 1e-6,
}


class InvalidConfigValue(ValueError):
    pass


def load_config() -> dict[str, Any]:
    if not CONFIG_FILE.exists():
        write_config(default_config)

    return {**default_config, **json.loads(CONFIG_FILE.read_text())}


def write_config(config: dict[str, Any]):
    CONFIG_DIR.mkdir(parents=True, exist_ok=True)
    with open(CONFIG_FILE, "w") as f:
        f.write(json.dumps(config, indent=2))


def coerce_value(key: str, value: str) -> Any:
    """Parse ``value`` as the type of the default for ``key``."""
    kind = type(default_config[key])
    try:
        parsed = kind(float(value)) if kind is int else kind(value)
    except ValueError:
        raise InvalidConfigValue(f"{key} expects a {kind.__name__}, got '{value}'")

    if key == "method" and parsed not in ("rk4", "rk45"):
        raise InvalidConfigValue("method must be rk4 or rk45")
    if kind in (int, float) and not parsed > 0:
        raise InvalidConfigValue(f"{key} must be positive")
    return parsed


def resolve_defaults(**overrides: Any) -> dict[str, Any]:
    """Persisted defaults with every non-None override applied."""
    config = load_config()
    config.update({k: v for k, v in overrides.items() if v is not None})
    return config
