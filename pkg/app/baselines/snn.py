from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np
import tensorly as tl

from app.core.errors import ConfigError
from app.embedding.hankel import EmbeddingSpec, HankelTensor, hankelize, inverse_hankelize
from app.grid.speed_field import SpeedField
from app.solver.admm import AdmmCompletion, IterationCallback
from app.solver.config import AdmmConfig
from app.solver.shrinkage import shrink
from app.solver.trace import ImputationResult


@dataclass(frozen=True)
class SnnConfig(AdmmConfig):
    alphas: Tuple[float, float, float, float] = (0.1, 0.4, 0.1, 0.4)
    spec: EmbeddingSpec = field(default_factory=lambda: EmbeddingSpec(40, 30))
    min_iters: int = 50

    def validate(self):
        super().validate()
        if len(self.alphas) != 4:
            raise ConfigError(f"alphas must have 4 entries, got {len(self.alphas)}")
        if any(a < 0 for a in self.alphas) or not np.isclose(sum(self.alphas), 1.0):
            raise ConfigError(f"alphas must be non-negative and sum to 1, got {self.alphas}")


def mode_unfold(tensor: np.ndarray, mode: int) -> np.ndarray:
    """Развёртка по моде k: I_k × Π_{i≠k} I_i."""
    return tl.unfold(tensor, mode)


def mode_fold(matrix: np.ndarray, mode: int, shape: Tuple[int, ...]) -> np.ndarray:
    return tl.fold(matrix, mode, shape)


class SnnSolver(AdmmCompletion):
    """
    Сумма ядерных норм четырёх развёрток ганкелева тензора (HaLRTC):
    для каждой моды своя копия M_k и двойственная Λ_k, согласование через среднее
    (M_k + Λ_k/ρ) по модам, затем H⁻¹ и закрепление наблюдений.
    Моды с α_k = 0 не сжимаются.
    """

    name = "sth-snn"

    def __init__(self, train: SpeedField, cfg: SnnConfig):
        cfg.validate()
        cfg.spec.validate(train.shape)
        super().__init__(train, cfg)

    def _setup(self, Z: np.ndarray):
        dim = self.cfg.spec.tensor_shape(Z.shape)
        self.duals: List[np.ndarray] = [np.zeros(dim) for _ in range(4)]
        self.shrunk_modes: List[int] = []

    def _step(self, Z: np.ndarray, rho: float) -> Tuple[np.ndarray, float]:
        spec = self.cfg.spec
        HZ = hankelize(Z, spec).data
        dim = HZ.shape

        copies = []
        objective = 0.0
        self.shrunk_modes = []
        for mode, (alpha, dual) in enumerate(zip(self.cfg.alphas, self.duals)):
            target = HZ - dual / rho
            if alpha > 0:
                matrix, spectrum = shrink(mode_unfold(target, mode), alpha / rho)
                target = mode_fold(matrix, mode, dim)
                objective += alpha * float(spectrum.sum())
                self.shrunk_modes.append(mode)
            copies.append(target)

        consensus = sum(M + dual / rho for M, dual in zip(copies, self.duals)) / len(copies)
        Z_new = self.pin(inverse_hankelize(HankelTensor(consensus, spec, Z.shape)))

        HZ_new = hankelize(Z_new, spec).data
        for dual, M in zip(self.duals, copies):
            dual += rho * (M - HZ_new)
        return Z_new, objective


def sth_snn(train: SpeedField, cfg: SnnConfig,
            on_iteration: Optional[IterationCallback] = None) -> ImputationResult:
    return SnnSolver(train, cfg).run(on_iteration)
