"""Повторные эксперименты: случайные обучающие машины, восстановление каждым методом, оценка."""
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Mapping, Sequence

import numpy as np
import pandas as pd
from tqdm import tqdm

from app.core.errors import ConfigError, TrialFailedError
from app.core.io import write_json
from app.grid.aggregate import aggregate, select_window, split_trajectories, trim_empty_borders
from app.grid.records import records_to_frame
from app.grid.speed_field import SpeedField, crop_to
from .methods import check_method, run_method
from .metrics import EvalReport, score

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrialOutcome:
    seed: int
    reports: Dict[str, EvalReport]   # метод -> оценка
    train_mask: np.ndarray = field(repr=False, compare=False)


@dataclass(frozen=True)
class MethodSummary:
    method: str
    mae_mean: float
    mae_std: float
    rmse_mean: float
    rmse_std: float
    wall_s_mean: float
    wall_s_std: float
    n_trials: int
    missing_rate_mean: float

    @classmethod
    def from_reports(cls, method: str, reports: Sequence[EvalReport]) -> "MethodSummary":
        mae = np.array([r.mae for r in reports])
        rmse = np.array([r.rmse for r in reports])
        wall = np.array([r.wall_time_s for r in reports])
        return cls(method=method,
                   mae_mean=float(mae.mean()), mae_std=float(mae.std()),
                   rmse_mean=float(rmse.mean()), rmse_std=float(rmse.std()),
                   wall_s_mean=float(wall.mean()), wall_s_std=float(wall.std()),
                   n_trials=len(reports),
                   missing_rate_mean=float(np.mean([r.missing_rate for r in reports])))

    def to_json(self) -> dict:
        return {"mae_mean": self.mae_mean, "mae_std": self.mae_std,
                "rmse_mean": self.rmse_mean, "rmse_std": self.rmse_std,
                "wall_s_mean": self.wall_s_mean, "wall_s_std": self.wall_s_std,
                "n_trials": self.n_trials, "missing_rate_mean": self.missing_rate_mean}


@dataclass
class TrialReport:
    summaries: Dict[str, MethodSummary]
    outcomes: List[TrialOutcome]

    def to_json(self) -> dict:
        return {name: s.to_json() for name, s in self.summaries.items()}

    def write(self, path: str | Path):
        write_json(path, self.to_json())


def run_single_trial(frame: pd.DataFrame, truth: SpeedField, fraction: float, seed: int,
                     methods: Sequence[str], settings: Mapping[str, Any]) -> TrialOutcome:
    """Одно разбиение и все методы на нём: у всех методов одна и та же обучающая маска."""
    try:
        split = split_trajectories(frame, fraction, seed)
        full = aggregate(frame, truth.ls, truth.lt, vehicle_filter=split.train_vehicle_ids)
        train = crop_to(full, truth)

        reports = {}
        for name in methods:
            result = run_method(name, train, settings)
            report = score(truth, result.completed, train.mask)
            reports[name] = EvalReport(report.mae, report.rmse, report.n_test,
                                       report.missing_rate, result.wall_time_s)
            logger.info("seed=%d %s: MAE=%.4f RMSE=%.4f (%.2f с)", seed, name,
                        report.mae, report.rmse, result.wall_time_s)
    except Exception as exc:
        raise TrialFailedError(seed, exc) from exc
    return TrialOutcome(seed=seed, reports=reports, train_mask=train.mask)


def run_trials(records, fraction: float, n_trials: int, methods: Sequence[str],
               settings: Mapping[str, Any], ls: float = 10.0, lt: float = 5.0,
               base_seed: int = 0, jobs: int = 1, progress: bool = True,
               time_range=None, position_range=None) -> TrialReport:
    """
    n_trials разбиений с сидами base_seed + k. Записи сперва обрезаются окном
    time_range/position_range. Истиной служит поле по всем машинам
    с обрезанными краями; обучающее поле строится на той же решётке.
    Итог сводится в порядке сидов, независимо от порядка завершения.
    """
    if n_trials < 1:
        raise ConfigError(f"n_trials must be >= 1, got {n_trials}")
    if jobs < 1:
        raise ConfigError(f"jobs must be >= 1, got {jobs}")
    methods = [check_method(m) for m in methods]
    if not methods:
        raise ConfigError("no methods to run")

    frame = records_to_frame(records)
    if time_range is not None or position_range is not None:
        frame = select_window(frame, time_range, position_range)
    truth = trim_empty_borders(aggregate(frame, ls, lt))
    logger.info("Истина %dx%d, наблюдено %d ячеек", *truth.shape, truth.n_observed)

    seeds = [base_seed + k for k in range(n_trials)]
    settings = dict(settings)
    if jobs == 1:
        outcomes = [run_single_trial(frame, truth, fraction, s, methods, settings)
                    for s in tqdm(seeds, desc="trials", disable=not progress)]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(run_single_trial, frame, truth, fraction, s, methods, settings)
                       for s in seeds]
            outcomes = [f.result() for f in tqdm(futures, desc="trials", disable=not progress)]

    summaries = {name: MethodSummary.from_reports(name, [o.reports[name] for o in outcomes])
                 for name in methods}
    return TrialReport(summaries=summaries, outcomes=outcomes)
