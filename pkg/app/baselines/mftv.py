import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from app.core.errors import ConfigError
from app.grid.speed_field import SpeedField
from app.solver.admm import AdmmCompletion, IterationCallback
from app.solver.config import AdmmConfig
from app.solver.shrinkage import shrink
from app.solver.trace import ImputationResult
from .tv import TvProx, tv_regularizer

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class MftvConfig(AdmmConfig):
    gamma: float = 1.0
    min_iters: int = 50
    tv_inner_tol: float = 1e-6
    tv_inner_iters: int = 50

    def validate(self):
        super().validate()
        if not self.gamma >= 0:
            raise ConfigError(f"gamma must be >= 0, got {self.gamma}")
        if not (self.tv_inner_tol > 0 and self.tv_inner_iters >= 1):
            raise ConfigError("tv_inner_tol must be > 0 and tv_inner_iters >= 1")


class MftvSolver(AdmmCompletion):
    """
    min ‖Z‖_* + γ TV(Z) при Z_Ω = Y_Ω.
    Две вспомогательные копии: L (ядерная норма) и T (полная вариация),
    двойственные Λ1, Λ2; Z равно среднему двух копий вне Ω.
    """

    name = "mftv"

    def _setup(self, Z: np.ndarray):
        self.lam_nuc = np.zeros_like(Z)
        self.lam_tv = np.zeros_like(Z)
        self.tv_prox = TvProx(Z.shape, self.cfg.tv_inner_tol, self.cfg.tv_inner_iters)

    def _step(self, Z: np.ndarray, rho: float) -> Tuple[np.ndarray, float]:
        gamma = self.cfg.gamma

        L, spectrum = shrink(Z - self.lam_nuc / rho, 1.0 / rho)
        if gamma > 0:
            T = self.tv_prox(Z - self.lam_tv / rho, gamma / rho)
            logger.debug("mftv: prox TV за %d внутренних итераций", self.tv_prox.last_iters)
        else:
            T = Z - self.lam_tv / rho

        Z_new = self.pin(0.5 * ((L + self.lam_nuc / rho) + (T + self.lam_tv / rho)))

        self.lam_nuc += rho * (L - Z_new)
        self.lam_tv += rho * (T - Z_new)
        return Z_new, float(spectrum.sum()) + gamma * tv_regularizer(T)


def mftv(train: SpeedField, cfg: MftvConfig,
         on_iteration: Optional[IterationCallback] = None) -> ImputationResult:
    return MftvSolver(train, cfg).run(on_iteration)
