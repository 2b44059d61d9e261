"""Анизотропная полная вариация и её проксимальный шаг (итеративное отсечение двойственных переменных)."""
from typing import Tuple

import numpy as np


def tv_regularizer(X: np.ndarray) -> float:
    """Сумма |разностей| по всем соседним парам: каждая вертикальная и горизонтальная пара ровно один раз."""
    X = np.asarray(X, dtype=np.float64)
    return float(np.abs(np.diff(X, axis=0)).sum() + np.abs(np.diff(X, axis=1)).sum())


def grad(x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    return np.diff(x, axis=0), np.diff(x, axis=1)


def grad_adjoint(g_v: np.ndarray, g_h: np.ndarray) -> np.ndarray:
    """Dᵀ: сопряжённый к grad оператор (минус дивергенция)."""
    out = -np.diff(np.pad(g_v, ((1, 1), (0, 0))), axis=0)
    out -= np.diff(np.pad(g_h, ((0, 0), (1, 1))), axis=1)
    return out


class TvProx:
    """
    prox_{λ TV}(v) = argmin_x ½‖x − v‖² + λ TV(x).
    Двойственные p_v, p_h лежат в ящике [−λ, λ]; шаг 1/8, т.к. ‖D‖² ≤ 8.
    Двойственные переменные хранятся между вызовами (тёплый старт).
    """

    STEP = 1.0 / 8.0

    def __init__(self, shape: Tuple[int, int], tol: float = 1e-6, max_iters: int = 50):
        n, t = shape
        self.p_v = np.zeros((max(n - 1, 0), t))
        self.p_h = np.zeros((n, max(t - 1, 0)))
        self.tol = tol
        self.max_iters = max_iters
        self.last_iters = 0

    def __call__(self, v: np.ndarray, lam: float) -> np.ndarray:
        np.clip(self.p_v, -lam, lam, out=self.p_v)
        np.clip(self.p_h, -lam, lam, out=self.p_h)

        x = v - grad_adjoint(self.p_v, self.p_h)
        for k in range(1, self.max_iters + 1):
            g_v, g_h = grad(x)
            self.p_v = np.clip(self.p_v + self.STEP * g_v, -lam, lam)
            self.p_h = np.clip(self.p_h + self.STEP * g_h, -lam, lam)

            x_new = v - grad_adjoint(self.p_v, self.p_h)
            change = np.linalg.norm(x_new - x) / max(np.linalg.norm(x_new), 1e-12)
            x = x_new
            if change < self.tol:
                break
        self.last_iters = k
        return x
