import logging
from typing import Tuple

import numpy as np
import scipy.linalg

from app.core.errors import ConfigError, DecompositionError, NumericalFailureError

logger = logging.getLogger(__name__)


def thin_svd(A: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Тонкое SVD: стоимость определяется меньшей стороной матрицы."""
    try:
        return scipy.linalg.svd(A, full_matrices=False, lapack_driver="gesdd", check_finite=False)
    except np.linalg.LinAlgError as exc:
        logger.warning("gesdd не сошёлся (%s), повтор через gesvd", exc)
    try:
        return scipy.linalg.svd(A, full_matrices=False, lapack_driver="gesvd", check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise DecompositionError(str(exc)) from exc


def shrink(A: np.ndarray, tau: float, r: int = 0) -> Tuple[np.ndarray, np.ndarray]:
    """
    Оператор D_tau для усечённой ядерной нормы.
    Первые r сингулярных чисел остаются как есть, остальные: max(σ − tau, 0).
    Возвращает (матрица, новые сингулярные числа).
    """
    A = np.asarray(A, dtype=np.float64)
    if A.ndim != 2:
        raise ConfigError("shrinkage expects a matrix")
    if not np.isfinite(A).all():
        raise NumericalFailureError("input contains NaN or Inf")
    if not (tau >= 0):
        raise ConfigError(f"threshold must be >= 0, got {tau}")
    if not (0 <= r < min(A.shape)):
        raise ConfigError(f"truncation r={r} must satisfy 0 <= r < {min(A.shape)}")

    U, s, Vt = thin_svd(A)
    s_new = s.copy()
    s_new[r:] = np.maximum(s[r:] - tau, 0.0)

    keep = s_new > 0
    X = (U[:, keep] * s_new[keep]) @ Vt[keep]
    return X, s_new


def truncated_svt(A: np.ndarray, tau: float, r: int = 0) -> np.ndarray:
    return shrink(A, tau, r)[0]


def svt(A: np.ndarray, tau: float) -> np.ndarray:
    """Обычное сжатие сингулярных чисел (ядерная норма, r = 0)."""
    return shrink(A, tau, 0)[0]


def truncated_nuclear_norm(X: np.ndarray, r: int = 0) -> float:
    s = scipy.linalg.svdvals(X, check_finite=False)
    return float(s[r:].sum())
