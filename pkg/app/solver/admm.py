import logging
from typing import Callable, Optional, Tuple

import numpy as np

from app.core.errors import DegenerateNormalizerError, EmptyObservationsError, NumericalFailureError
from app.grid.speed_field import SpeedField
from .config import AdmmConfig
from .trace import ConvergenceTrace, ImputationResult, IterationClock, TraceRecord

logger = logging.getLogger(__name__)

IterationCallback = Callable[[int, np.ndarray], None]


def relative_change(z_new: np.ndarray, z_old: np.ndarray, y: np.ndarray, mask: np.ndarray) -> float:
    """||Z_new − Z_old||_F / ||Y_Ω||_F."""
    if not (z_new.shape == z_old.shape == y.shape == mask.shape):
        raise ValueError("shapes of Z_new, Z_old, Y and mask must agree")
    normalizer = np.linalg.norm(y[mask])
    if normalizer == 0:
        raise DegenerateNormalizerError("||Y_Omega||_F = 0")
    return float(np.linalg.norm(z_new - z_old) / normalizer)


class AdmmCompletion:
    """
    Общий цикл ADMM-восстановления поля: закрепление наблюдений, критерий
    остановки по относительному изменению, рост штрафа ρ, трасса.
    Наследники реализуют _setup и _step.
    """

    name = "admm"

    def __init__(self, train: SpeedField, cfg: AdmmConfig):
        cfg.validate()
        if train.n_observed == 0:
            raise EmptyObservationsError("training field has no observed cells")

        self.train = train
        self.cfg = cfg
        self.Y = train.values
        self.mask = train.mask
        self.missing = ~train.mask

        self.normalizer = float(np.linalg.norm(self.Y[self.mask]))
        if self.normalizer == 0:
            raise DegenerateNormalizerError("all observed values are zero")

        self.rho = cfg.rho0
        self.trace = ConvergenceTrace()

    # --- ХУКИ НАСЛЕДНИКОВ ---

    def _setup(self, Z: np.ndarray):
        pass

    def _step(self, Z: np.ndarray, rho: float) -> Tuple[np.ndarray, float]:
        """Одна итерация: новое (уже закреплённое) Z и значение целевой нормы."""
        raise NotImplementedError

    # --- ОБЩЕЕ ---

    def pin(self, Z: np.ndarray) -> np.ndarray:
        Z[self.mask] = self.Y[self.mask]
        return Z

    def initial_estimate(self) -> np.ndarray:
        Z = np.zeros_like(self.Y)
        if self.cfg.warm_start == "mean":
            Z[self.missing] = self.Y[self.mask].mean()
        return self.pin(Z)

    def run(self, on_iteration: Optional[IterationCallback] = None) -> ImputationResult:
        clock = IterationClock()
        Z = self.initial_estimate()
        self._setup(Z)
        logger.info("%s: поле %dx%d, наблюдений %d (пропусков %.1f%%)", self.name,
                    *self.Y.shape, self.train.n_observed, 100 * self.train.missing_rate)

        converged = False
        iteration = 0
        for iteration in range(1, self.cfg.max_iters + 1):
            Z_new, objective = self._step(Z, self.rho)
            if not np.isfinite(Z_new).all():
                raise NumericalFailureError(f"{self.name}: non-finite estimate at iteration {iteration}")

            change = relative_change(Z_new, Z, self.Y, self.mask)
            self.trace.append(TraceRecord(iteration, change, self.rho, float(objective), clock.lap_ms()))
            logger.debug("%s iter=%d rel_change=%.3e rho=%.3e norm=%.6g",
                         self.name, iteration, change, self.rho, objective)
            Z = Z_new
            if on_iteration is not None:
                on_iteration(iteration, Z)

            # Без пропусков закреплённое Z уже окончательное
            if not self.missing.any() or (change < self.cfg.epsilon and iteration >= self.cfg.min_iters):
                converged = True
                break
            self.rho = min(self.cfg.beta * self.rho, self.cfg.rho_max)

        wall = clock.total_s()
        if converged:
            logger.info("%s: сошёлся за %d итераций, %.2f с", self.name, iteration, wall)
        else:
            logger.warning("%s: не сошёлся за %d итераций (последнее изменение %.3e)",
                           self.name, iteration, self.trace.records[-1].relative_change)

        return ImputationResult(completed=self.train.completed(Z), trace=self.trace,
                                converged=converged, iterations=iteration,
                                wall_time_s=wall, method=self.name)
