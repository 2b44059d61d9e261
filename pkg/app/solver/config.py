import math
from dataclasses import dataclass, field, fields, replace
from typing import Any, Mapping, Optional, Tuple

from app.core.errors import ConfigError
from app.embedding.hankel import EmbeddingSpec

WARM_STARTS = ("zero", "mean")
DUAL_INITS = ("zero", "observed")


@dataclass(frozen=True)
class AdmmConfig:
    """Общие параметры ADMM: штраф ρ, его потолок и рост β, порог ε, лимиты итераций."""
    rho0: float = 5e-6
    rho_max: float = 10.0
    beta: float = 1.1
    epsilon: float = 1e-3
    max_iters: int = 200
    # До min_iters итераций критерий ε не останавливает прогон
    min_iters: int = 1
    warm_start: str = "zero"

    def validate(self):
        if not self.rho0 > 0:
            raise ConfigError(f"rho0 must be > 0, got {self.rho0}")
        if not self.rho_max >= self.rho0:
            raise ConfigError(f"rho_max={self.rho_max} must be >= rho0={self.rho0}")
        if not 1.0 <= self.beta <= 1.2:
            raise ConfigError(f"beta must lie in [1.0, 1.2], got {self.beta}")
        if not self.epsilon > 0:
            raise ConfigError(f"epsilon must be > 0, got {self.epsilon}")
        if self.max_iters < 1:
            raise ConfigError(f"max_iters must be >= 1, got {self.max_iters}")
        if self.min_iters < 1:
            raise ConfigError(f"min_iters must be >= 1, got {self.min_iters}")
        if self.warm_start not in WARM_STARTS:
            raise ConfigError(f"warm_start must be one of {WARM_STARTS}, got {self.warm_start!r}")

    @classmethod
    def from_settings(cls, settings: Mapping[str, Any]):
        """Берёт из плоского словаря настроек только свои ключи; tau_s/tau_t собираются в spec."""
        names = {f.name for f in fields(cls)}
        kwargs = {k: v for k, v in settings.items() if k in names and v is not None}
        if "spec" in names and ("tau_s" in settings or "tau_t" in settings):
            base = kwargs.get("spec") or EmbeddingSpec(40, 30)
            kwargs["spec"] = EmbeddingSpec(int(settings.get("tau_s", base.tau_s)),
                                           int(settings.get("tau_t", base.tau_t)))
        if "alphas" in kwargs:
            kwargs["alphas"] = tuple(float(a) for a in kwargs["alphas"])
        for name in ("max_iters", "min_iters", "truncation_r", "tv_inner_iters"):
            if name in kwargs:
                kwargs[name] = int(kwargs[name])
        return cls(**kwargs)


def default_truncation(n_rows: int) -> int:
    return int(math.floor(0.05 * n_rows))


@dataclass(frozen=True)
class SolverConfig(AdmmConfig):
    spec: EmbeddingSpec = field(default_factory=lambda: EmbeddingSpec(40, 30))
    # None -> floor(0.05 * N) по числу строк поля
    truncation_r: Optional[int] = None
    dual_init: str = "observed"

    def validate(self):
        super().validate()
        if self.truncation_r is not None and self.truncation_r < 0:
            raise ConfigError(f"truncation_r must be >= 0, got {self.truncation_r}")
        if self.dual_init not in DUAL_INITS:
            raise ConfigError(f"dual_init must be one of {DUAL_INITS}, got {self.dual_init!r}")

    def resolve(self, shape: Tuple[int, int]) -> "SolverConfig":
        """Проверки, зависящие от размера поля; подставляет r по умолчанию."""
        self.validate()
        self.spec.validate(shape)
        r = default_truncation(shape[0]) if self.truncation_r is None else self.truncation_r
        p, q = self.spec.unfolded_shape(shape)
        if r >= min(p, q):
            raise ConfigError(f"truncation_r={r} must be < min(p, q) = {min(p, q)}")
        return replace(self, truncation_r=r)
