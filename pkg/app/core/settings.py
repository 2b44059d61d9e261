"""Настройки: встроенные значения < configs/settings.json < --config < флаги командной строки."""
import json
import logging
from pathlib import Path
from typing import Any, Dict, Mapping, Optional

from app.core.errors import ConfigError

logger = logging.getLogger(__name__)

PROJECT_ROOT = Path(__file__).resolve().parents[2]
SETTINGS_PATH = PROJECT_ROOT / "configs" / "settings.json"

# --- ВСТРОЕННЫЕ ЗНАЧЕНИЯ ---
DEFAULTS: Dict[str, Any] = {
    "tau_s": 40,
    "tau_t": 30,
    "rho0": 5e-6,
    "rho_max": 10.0,
    "beta": 1.1,
    "epsilon": 1e-3,
    "truncation_r": None,      # None -> floor(0.05 * N)
    "max_iters": 200,
    "min_iters": 1,
    "warm_start": "zero",
    "dual_init": "observed",
    "seed": 0,
    "gamma": 1.0,
    "alphas": [0.1, 0.4, 0.1, 0.4],
    "tv_inner_tol": 1e-6,
    "tv_inner_iters": 50,
    "ls": 10.0,
    "lt": 5.0,
    "methods": {},             # переопределения по методам: {"mftv": {"min_iters": 80}}
}

KNOWN_KEYS = frozenset(DEFAULTS)


def read_config(path: str | Path) -> Dict[str, Any]:
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: top level must be an object")

    unknown = set(raw) - KNOWN_KEYS
    if unknown:
        raise ConfigError(f"{path}: unknown keys {sorted(unknown)}")
    methods = raw.get("methods", {})
    if not isinstance(methods, dict) or not all(isinstance(v, dict) for v in methods.values()):
        raise ConfigError(f"{path}: 'methods' must map method names to objects")
    for name, section in methods.items():
        bad = set(section) - KNOWN_KEYS - {"methods"}
        if bad or "methods" in section:
            raise ConfigError(f"{path}: unknown keys {sorted(bad | ({'methods'} & set(section)))} in methods.{name}")
    return raw


def load_settings(config_path: Optional[str | Path] = None,
                  overrides: Optional[Mapping[str, Any]] = None,
                  settings_path: Optional[str | Path] = SETTINGS_PATH) -> Dict[str, Any]:
    settings = dict(DEFAULTS)
    settings["methods"] = {}

    for path in (settings_path, config_path):
        if path is None:
            continue
        if path == settings_path and not Path(path).exists():
            continue
        layer = read_config(path)
        methods = layer.pop("methods", {})
        settings.update(layer)
        for name, section in methods.items():
            settings["methods"].setdefault(name, {}).update(section)
        logger.debug("Настройки из %s: %s", path, sorted(layer))

    for key, value in (overrides or {}).items():
        if value is None:
            continue
        if key not in KNOWN_KEYS:
            raise ConfigError(f"unknown setting {key!r}")
        settings[key] = value
    return settings
