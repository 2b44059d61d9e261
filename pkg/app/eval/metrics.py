from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.linalg

from app.core.errors import DegenerateNormalizerError, IncompleteFieldError, InputError, NothingToScoreError
from app.core.io import atomic_write, fmt
from app.grid.speed_field import SpeedField


@dataclass(frozen=True)
class EvalReport:
    mae: float            # фут/с
    rmse: float           # фут/с
    n_test: int
    missing_rate: float   # доля ячеек вне обучающей маски
    wall_time_s: float = 0.0

    def to_json(self) -> dict:
        return {"mae": self.mae, "rmse": self.rmse, "n_test": self.n_test,
                "missing_rate": self.missing_rate, "wall_time_s": self.wall_time_s}


def score(truth: SpeedField, imputed: SpeedField, train_mask: np.ndarray) -> EvalReport:
    """MAE и RMSE по ячейкам, наблюдённым в истине и не наблюдённым в обучении."""
    train_mask = np.asarray(train_mask, dtype=bool)
    if not (truth.shape == imputed.shape == train_mask.shape):
        raise InputError(f"shapes differ: truth {truth.shape}, imputed {imputed.shape}, mask {train_mask.shape}")

    test = truth.mask & ~train_mask
    n_test = int(test.sum())
    if n_test == 0:
        raise NothingToScoreError("no cell is observed in truth and missing in training")

    err = imputed.values[test] - truth.values[test]
    return EvalReport(
        mae=float(np.mean(np.abs(err))),
        rmse=float(np.sqrt(np.mean(err ** 2))),
        n_test=n_test,
        missing_rate=1.0 - float(train_mask.sum()) / train_mask.size,
    )


def cep(field: SpeedField) -> np.ndarray:
    """Накопленная доля сингулярных чисел: c_k = Σ_{i≤k} σ_i / Σ σ_i."""
    if not field.is_complete:
        raise IncompleteFieldError(f"{field.n_observed} of {field.values.size} cells observed")

    s = scipy.linalg.svdvals(field.values)
    total = s.sum()
    if total == 0:
        raise DegenerateNormalizerError("all singular values are zero")
    c = np.cumsum(s) / total
    c[-1] = 1.0
    return c


def write_cep_csv(path: str | Path, values: np.ndarray):
    with atomic_write(path) as f:
        f.write("k,cep\n")
        for k, c in enumerate(values, start=1):
            f.write(f"{k},{fmt(c)}\n")
