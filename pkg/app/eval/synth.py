"""Синтетические поля скоростей: гладкая неотрицательная низкоранговая истина и маска наблюдений."""
import math
from dataclasses import dataclass, field
from typing import Any, Mapping, Tuple, Union

import numpy as np
from scipy.ndimage import gaussian_filter1d

from app.core.errors import ConfigError, InvalidPatternError
from app.grid.speed_field import SpeedField

BASE_SPEED = 50.0  # фут/с, масштаб синтетической истины


@dataclass(frozen=True)
class UniformMissing:
    rate: float  # доля пропусков, [0, 1)

    def mask(self, shape, rng, spec) -> np.ndarray:
        if not 0.0 <= self.rate < 1.0:
            raise InvalidPatternError(f"uniform rate {self.rate} outside [0, 1)")
        return rng.random(shape) >= self.rate


@dataclass(frozen=True)
class WholeColumns:
    count: int  # сколько столбцов (моментов времени) пропущено целиком

    def mask(self, shape, rng, spec) -> np.ndarray:
        rows, cols = shape
        if not 0 <= self.count < cols:
            raise InvalidPatternError(f"whole_columns({self.count}) on {cols} columns")
        mask = np.ones(shape, dtype=bool)
        mask[:, rng.choice(cols, size=self.count, replace=False)] = False
        return mask


@dataclass(frozen=True)
class Trajectories:
    count: int               # число «плавающих» машин
    slope: float = -10.0     # фут/с, наклон линии в пространстве-времени

    def mask(self, shape, rng, spec) -> np.ndarray:
        """Наблюдаются только ячейки, которые пересекает каждая прямая x(t) = x0 + slope·(t − t0)."""
        rows, cols = shape
        if self.count < 1:
            raise InvalidPatternError(f"trajectories({self.count}) needs at least one line")

        cells_per_col = self.slope * spec.lt / spec.ls
        mask = np.zeros(shape, dtype=bool)
        for _ in range(self.count):
            anchor_row = rng.uniform(0, rows)
            anchor_col = rng.integers(0, cols)
            for j in range(cols):
                a = anchor_row + cells_per_col * (j - anchor_col)
                b = a + cells_per_col
                lo = max(int(math.floor(min(a, b))), 0)
                hi = min(int(math.floor(max(a, b))), rows - 1)
                if lo <= hi:
                    mask[lo:hi + 1, j] = True
        return mask


MissingPattern = Union[UniformMissing, WholeColumns, Trajectories]


@dataclass(frozen=True)
class SyntheticSpec:
    rows: int
    cols: int
    rank: int = 1
    noise_sigma: float = 0.0
    # Маски шаблонов перемножаются: 70% случайных пропусков + 5 пустых столбцов и т.п.
    missing: Tuple[MissingPattern, ...] = field(default=(UniformMissing(0.5),))
    seed: int = 0
    ls: float = 10.0
    lt: float = 5.0

    def validate(self):
        if self.rows < 1 or self.cols < 1:
            raise ConfigError(f"grid must be at least 1x1, got {self.rows}x{self.cols}")
        if not 1 <= self.rank <= min(self.rows, self.cols):
            raise ConfigError(f"rank {self.rank} outside [1, {min(self.rows, self.cols)}]")
        if self.noise_sigma < 0:
            raise ConfigError(f"noise_sigma must be >= 0, got {self.noise_sigma}")

    @classmethod
    def from_mapping(cls, raw: Mapping[str, Any]) -> "SyntheticSpec":
        kinds = {"uniform": UniformMissing, "whole_columns": WholeColumns, "trajectories": Trajectories}
        patterns = []
        for item in raw.get("missing", [{"kind": "uniform", "rate": 0.5}]):
            item = dict(item)
            kind = item.pop("kind", None)
            if kind not in kinds:
                raise InvalidPatternError(f"unknown pattern kind {kind!r}")
            try:
                patterns.append(kinds[kind](**item))
            except TypeError as exc:
                raise InvalidPatternError(str(exc)) from None

        known = {"rows", "cols", "rank", "noise_sigma", "seed", "ls", "lt"}
        unknown = set(raw) - known - {"missing"}
        if unknown:
            raise ConfigError(f"unknown synthetic problem keys {sorted(unknown)}")
        return cls(missing=tuple(patterns), **{k: raw[k] for k in known if k in raw})


def _smooth_factor(rng: np.random.Generator, length: int) -> np.ndarray:
    """Гладкий положительный профиль в [0.5, 1.5]."""
    raw = gaussian_filter1d(rng.standard_normal(length), sigma=max(length / 10.0, 1.0), mode="nearest")
    peak = np.abs(raw).max()
    return 1.0 + 0.5 * (raw / peak if peak > 0 else raw)


def synth(spec: SyntheticSpec) -> Tuple[SpeedField, SpeedField]:
    """Возвращает (истина, обучающее поле). Детерминировано по seed."""
    spec.validate()
    rng = np.random.default_rng(spec.seed)
    shape = (spec.rows, spec.cols)

    U = np.column_stack([_smooth_factor(rng, spec.rows) for _ in range(spec.rank)])
    V = np.column_stack([_smooth_factor(rng, spec.cols) for _ in range(spec.rank)])
    values = (BASE_SPEED / spec.rank) * U @ V.T
    if spec.noise_sigma > 0:
        values = np.maximum(values + rng.normal(0.0, spec.noise_sigma, shape), 0.0)

    mask = np.ones(shape, dtype=bool)
    for pattern in spec.missing:
        mask &= pattern.mask(shape, rng, spec)
    if not mask.any():
        raise InvalidPatternError("pattern leaves no observed cell")

    truth = SpeedField(values=values, mask=np.ones(shape, dtype=bool), ls=spec.ls, lt=spec.lt)
    train = SpeedField(values=np.where(mask, values, 0.0), mask=mask, ls=spec.ls, lt=spec.lt)
    return truth, train
