from typing import Any, Callable, Dict, Mapping, Optional

from app.baselines.mean_fill import mean_fill
from app.baselines.mftv import MftvConfig, mftv
from app.baselines.snn import SnnConfig, sth_snn
from app.core.errors import ConfigError
from app.grid.speed_field import SpeedField
from app.solver.admm import IterationCallback
from app.solver.config import SolverConfig
from app.solver.sth_lrtc import sth_lrtc
from app.solver.trace import ImputationResult

Runner = Callable[[SpeedField, Mapping[str, Any], Optional[IterationCallback]], ImputationResult]

# Метод -> запуск по плоскому словарю настроек
METHODS: Dict[str, Runner] = {
    "sth-lrtc": lambda train, s, cb: sth_lrtc(train, SolverConfig.from_settings(s), cb),
    "mftv": lambda train, s, cb: mftv(train, MftvConfig.from_settings(s), cb),
    "sth-snn": lambda train, s, cb: sth_snn(train, SnnConfig.from_settings(s), cb),
    "mean": lambda train, s, cb: mean_fill(train),
}

# Ключи, которые у методов-наследников AdmmConfig задаются отдельно
_BASELINE_DEFAULTS = {"mftv": {"min_iters": 50}, "sth-snn": {"min_iters": 50}}


def check_method(name: str) -> str:
    if name not in METHODS:
        raise ConfigError(f"unknown method {name!r}, expected one of {sorted(METHODS)}")
    return name


def method_settings(name: str, settings: Mapping[str, Any]) -> Dict[str, Any]:
    """
    Настройки для конкретного метода. Секция settings["methods"][name]
    переопределяет общие ключи; min_iters общей секции относится только к STH-LRTC.
    """
    check_method(name)
    merged = {k: v for k, v in settings.items() if k != "methods"}
    if name in _BASELINE_DEFAULTS:
        merged.update(_BASELINE_DEFAULTS[name])
    merged.update((settings.get("methods") or {}).get(name, {}))
    return merged


def run_method(name: str, train: SpeedField, settings: Mapping[str, Any],
               on_iteration: Optional[IterationCallback] = None) -> ImputationResult:
    return METHODS[check_method(name)](train, method_settings(name, settings), on_iteration)
