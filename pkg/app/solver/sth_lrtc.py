from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from app.embedding.hankel import fold_matrix, unfold_matrix
from app.grid.speed_field import SpeedField
from .admm import AdmmCompletion, IterationCallback
from .config import SolverConfig
from .shrinkage import shrink
from .trace import ImputationResult


@dataclass
class SolverState:
    Z: np.ndarray      # текущее восстановление, Z_Ω = Y_Ω
    E: np.ndarray      # двойственная переменная в пространстве матриц
    rho: float
    iter: int = 0


class SthLrtcSolver(AdmmCompletion):
    """
    Восстановление через ганкелев тензор и усечённую ядерную норму его
    пространственно-временной развёртки.

    Одна итерация:
      X   = fold(D_{1/ρ}(unfold(H(Z)) − unfold(H(E))/ρ))
      Z_Ω̄ = H⁻¹(X − H(E)/ρ)_Ω̄,  Z_Ω = Y_Ω
      E   = E + ρ (H⁻¹(X) − Z)
    H линейно и H⁻¹∘H = id, поэтому H(Z) − H(E)/ρ = H(Z − E/ρ) и
    H⁻¹(X − H(E)/ρ) = H⁻¹(X) − E/ρ.
    """

    name = "sth-lrtc"

    def __init__(self, train: SpeedField, cfg: SolverConfig):
        cfg = cfg.resolve(train.shape)
        super().__init__(train, cfg)
        self.state: Optional[SolverState] = None

    def _setup(self, Z: np.ndarray):
        # По умолчанию E⁰ = Z⁰; dual_init="zero" даёт E⁰ = 0
        E = Z.copy() if self.cfg.dual_init == "observed" else np.zeros_like(Z)
        self.state = SolverState(Z=Z, E=E, rho=self.rho)

    def _step(self, Z: np.ndarray, rho: float) -> Tuple[np.ndarray, float]:
        cfg = self.cfg
        state = self.state
        E = state.E

        # --- X: сжатие сингулярных чисел развёртки ---
        A = unfold_matrix(Z - E / rho, cfg.spec)
        X_mat, spectrum = shrink(A, 1.0 / rho, cfg.truncation_r)
        X_back = fold_matrix(X_mat, cfg.spec, self.Y.shape)

        # --- Z: оцениваются только пропуски ---
        Z_new = self.pin(X_back - E / rho)

        # --- E ---
        state.E = E + rho * (X_back - Z_new)
        state.Z = Z_new
        state.rho = rho
        state.iter += 1
        return Z_new, float(spectrum[cfg.truncation_r:].sum())


def sth_lrtc(train: SpeedField, cfg: SolverConfig,
             on_iteration: Optional[IterationCallback] = None) -> ImputationResult:
    return SthLrtcSolver(train, cfg).run(on_iteration)
