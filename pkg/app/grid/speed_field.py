from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Tuple

import numpy as np
import pandas as pd

from app.core.errors import InputError
from app.core.io import FLOAT_FORMAT, atomic_write, read_csv_table


@dataclass(frozen=True)
class GridExtent:
    """Решётка ячеек: начало координат и размер N×T."""
    origin_pos: float
    origin_time: float
    n_rows: int
    n_cols: int


@dataclass(frozen=True)
class SpeedField:
    # Средняя скорость по ячейке, фут/с. Ненаблюдаемые ячейки хранят 0,
    # но решает всегда mask.
    values: np.ndarray
    # True = в ячейку попала хотя бы одна запись (множество Ω)
    mask: np.ndarray

    # Разрешение: ls в футах, lt в секундах
    ls: float = 1.0
    lt: float = 1.0

    # (смещение по позиции в футах, смещение по времени в секундах)
    origin: Tuple[float, float] = field(default=(0.0, 0.0))

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        mask = np.asarray(self.mask, dtype=bool)
        if values.ndim != 2 or values.shape != mask.shape:
            raise InputError(f"values {values.shape} and mask {mask.shape} must be equal 2-D shapes")
        if values.shape[0] < 1 or values.shape[1] < 1:
            raise InputError("field must have at least one cell")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "mask", mask)

    @property
    def shape(self) -> Tuple[int, int]:
        return self.values.shape

    @property
    def n_observed(self) -> int:
        return int(self.mask.sum())

    @property
    def missing_rate(self) -> float:
        return 1.0 - self.n_observed / self.values.size

    @property
    def is_complete(self) -> bool:
        return bool(self.mask.all())

    @property
    def extent(self) -> GridExtent:
        return GridExtent(self.origin[0], self.origin[1], *self.shape)

    def observed_values(self) -> np.ndarray:
        return self.values[self.mask]

    def completed(self, values: np.ndarray) -> "SpeedField":
        """Полностью наблюдаемое поле с той же решёткой."""
        return replace(self, values=np.array(values, dtype=np.float64), mask=np.ones(self.shape, dtype=bool))

    def crop(self, rows: slice, cols: slice) -> "SpeedField":
        r0 = rows.start or 0
        c0 = cols.start or 0
        return replace(
            self,
            values=self.values[rows, cols].copy(),
            mask=self.mask[rows, cols].copy(),
            origin=(self.origin[0] + r0 * self.ls, self.origin[1] + c0 * self.lt),
        )


def crop_to(field: SpeedField, reference: SpeedField) -> SpeedField:
    """Вырезает из field окно, совпадающее с решёткой reference."""
    if not (np.isclose(field.ls, reference.ls) and np.isclose(field.lt, reference.lt)):
        raise InputError("fields have different resolutions")

    r0 = int(round((reference.origin[0] - field.origin[0]) / field.ls))
    c0 = int(round((reference.origin[1] - field.origin[1]) / field.lt))
    n, t = reference.shape
    if r0 < 0 or c0 < 0 or r0 + n > field.shape[0] or c0 + t > field.shape[1]:
        raise InputError("reference window lies outside the field")
    return field.crop(slice(r0, r0 + n), slice(c0, c0 + t))


# --- CSV ---

def write_field(field: SpeedField, grid_path: str | Path, mask_path: str | Path | None = None):
    """Значения: N строк по T чисел, ненаблюдаемые ячейки пустые. Маска: 0/1 той же формы."""
    frame = pd.DataFrame(np.where(field.mask, field.values, np.nan))
    with atomic_write(grid_path) as f:
        frame.to_csv(f, header=False, index=False, float_format=FLOAT_FORMAT, na_rep="", lineterminator="\n")
    if mask_path is not None:
        write_mask(field.mask, mask_path)


def write_mask(mask: np.ndarray, path: str | Path):
    with atomic_write(path) as f:
        pd.DataFrame(mask.astype(np.int8)).to_csv(f, header=False, index=False, lineterminator="\n")


def read_mask(path: str | Path) -> np.ndarray:
    raw = read_csv_table(path, header=None).to_numpy()
    if not np.isin(raw, ["0", "1"]).all():
        raise InputError(f"mask {path} must contain only 0/1")
    return raw == "1"


def read_field(grid_path: str | Path, mask_path: str | Path | None = None,
               ls: float = 1.0, lt: float = 1.0, origin: Tuple[float, float] = (0.0, 0.0)) -> SpeedField:
    raw = read_csv_table(grid_path, header=None, skip_blank_lines=False).fillna("")
    cells = raw.apply(pd.to_numeric, errors="coerce").to_numpy(dtype=np.float64)

    blank = raw.to_numpy() == ""
    if (~blank & ~np.isfinite(cells)).any():
        row = int(np.flatnonzero((~blank & ~np.isfinite(cells)).any(axis=1))[0]) + 1
        raise InputError(f"non-numeric value in {grid_path}, row {row}")

    if mask_path is None:
        mask = ~blank
    else:
        mask = read_mask(mask_path)
        if mask.shape != cells.shape:
            raise InputError(f"mask {mask.shape} does not match grid {cells.shape}")
        if (mask & blank).any():
            raise InputError("mask marks an empty grid cell as observed")

    values = np.where(mask, np.nan_to_num(cells, nan=0.0), 0.0)
    return SpeedField(values=values, mask=mask, ls=ls, lt=lt, origin=origin)
