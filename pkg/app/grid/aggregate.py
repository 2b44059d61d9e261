import logging
import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from app.core.errors import ConfigError, EmptyFieldError, EmptyObservationsError, InvalidFractionError
from .records import TrajectoryRecord, records_to_frame
from .speed_field import GridExtent, SpeedField

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrajectorySplit:
    train_vehicle_ids: frozenset
    test_vehicle_ids: frozenset
    seed: int
    fraction: float


def grid_extent(frame: pd.DataFrame, ls: float, lt: float) -> GridExtent:
    """
    Решётка, покрывающая все записи. Начало выровнено по кратным ls/lt,
    поэтому запись (15 ft, 2 s) при ls=10, lt=5 попадает в ячейку (1, 0) от нуля.
    """
    origin_pos = math.floor(frame["position_ft"].min() / ls) * ls
    origin_time = math.floor(frame["time_s"].min() / lt) * lt
    n_rows = int(math.floor((frame["position_ft"].max() - origin_pos) / ls)) + 1
    n_cols = int(math.floor((frame["time_s"].max() - origin_time) / lt)) + 1
    return GridExtent(origin_pos, origin_time, n_rows, n_cols)


Range = Tuple[Optional[float], Optional[float]]


def select_window(frame: pd.DataFrame, time_range: Optional[Range] = None,
                  position_range: Optional[Range] = None) -> pd.DataFrame:
    """Оставляет записи с time_s и position_ft в полуинтервалах [lo, hi); None снимает границу."""
    keep = np.ones(len(frame), dtype=bool)
    for column, bounds in (("time_s", time_range), ("position_ft", position_range)):
        if bounds is None:
            continue
        lo, hi = bounds
        if lo is not None and hi is not None and not lo < hi:
            raise ConfigError(f"{column} window [{lo}, {hi}) is empty")
        values = frame[column].to_numpy()
        if lo is not None:
            keep &= values >= lo
        if hi is not None:
            keep &= values < hi
    if not keep.any():
        raise EmptyObservationsError("no records inside the time/position window")
    if not keep.all():
        logger.info("Окно по времени/положению: оставлено %d записей из %d", int(keep.sum()), len(frame))
    return frame[keep].reset_index(drop=True)


def aggregate(records: Sequence[TrajectoryRecord] | pd.DataFrame, ls: float, lt: float,
              vehicle_filter: Optional[Iterable[int]] = None,
              extent: Optional[GridExtent] = None,
              time_range: Optional[Range] = None,
              position_range: Optional[Range] = None) -> SpeedField:
    """
    Усредняет скорости записей по ячейкам ls×lt.

    Сначала записи обрезаются окном time_range/position_range. Решётка строится
    по ВСЕМ оставшимся записям (до фильтра машин), поэтому поле по обучающим
    машинам совпадает по форме с полем по всем машинам. Явный extent
    переопределяет её; записи вне extent отбрасываются.
    """
    if not (ls > 0 and lt > 0):
        raise ConfigError(f"resolutions must be positive, got ls={ls}, lt={lt}")

    frame = records_to_frame(records)
    if frame.empty:
        raise EmptyObservationsError("record set is empty")
    if time_range is not None or position_range is not None:
        frame = select_window(frame, time_range, position_range)
    if extent is None:
        extent = grid_extent(frame, ls, lt)

    if vehicle_filter is not None:
        frame = frame[frame["vehicle_id"].isin(set(vehicle_filter))]

    # Граница ячейки уходит в ячейку с большим индексом (floor)
    rows = np.floor((frame["position_ft"].to_numpy() - extent.origin_pos) / ls).astype(np.int64)
    cols = np.floor((frame["time_s"].to_numpy() - extent.origin_time) / lt).astype(np.int64)
    inside = (rows >= 0) & (rows < extent.n_rows) & (cols >= 0) & (cols < extent.n_cols)
    if not inside.any():
        raise EmptyObservationsError("no records left after filtering")

    cells = pd.DataFrame({"row": rows[inside], "col": cols[inside],
                          "speed": frame["speed_fts"].to_numpy()[inside]})
    # Сортировка делает сумму внутри ячейки независимой от порядка записей
    cells = cells.sort_values(["row", "col", "speed"], kind="mergesort")
    means = cells.groupby(["row", "col"], sort=False)["speed"].mean()

    values = np.zeros((extent.n_rows, extent.n_cols))
    mask = np.zeros_like(values, dtype=bool)
    r = means.index.get_level_values("row").to_numpy()
    c = means.index.get_level_values("col").to_numpy()
    values[r, c] = means.to_numpy()
    mask[r, c] = True

    logger.debug("Агрегировано %d записей в %d ячеек из %d", int(inside.sum()), len(means), values.size)
    return SpeedField(values=values, mask=mask, ls=ls, lt=lt,
                      origin=(extent.origin_pos, extent.origin_time))


def trim_empty_borders(field: SpeedField) -> SpeedField:
    """Убирает ведущие/хвостовые строки и столбцы без наблюдений; внутренние не трогает."""
    rows = np.flatnonzero(field.mask.any(axis=1))
    cols = np.flatnonzero(field.mask.any(axis=0))
    if rows.size == 0:
        raise EmptyFieldError("all cells are unobserved")

    r0, r1 = int(rows[0]), int(rows[-1]) + 1
    c0, c1 = int(cols[0]), int(cols[-1]) + 1
    if (r0, r1, c0, c1) == (0, field.shape[0], 0, field.shape[1]):
        return field

    logger.info("Обрезаны края: строки [%d, %d), столбцы [%d, %d) из %dx%d",
                r0, r1, c0, c1, *field.shape)
    return field.crop(slice(r0, r1), slice(c0, c1))


def split_trajectories(records: Sequence[TrajectoryRecord] | pd.DataFrame,
                       fraction: float, seed: int) -> TrajectorySplit:
    """Случайно выбирает round(fraction * число машин) обучающих машин без возвращения."""
    if not (0.0 < fraction <= 1.0):
        raise InvalidFractionError(f"{fraction} is outside (0, 1]")

    frame = records_to_frame(records)
    ids = np.unique(frame["vehicle_id"].to_numpy())
    if ids.size == 0:
        raise EmptyObservationsError("no vehicles to split")

    # Округление половин вверх: 0.05 * 1239 = 61.95 -> 62
    n_train = int(math.floor(fraction * ids.size + 0.5))
    rng = np.random.default_rng(seed)
    train = rng.choice(ids, size=n_train, replace=False)

    train_ids = frozenset(int(v) for v in train)
    test_ids = frozenset(int(v) for v in ids) - train_ids
    return TrajectorySplit(train_vehicle_ids=train_ids, test_vehicle_ids=test_ids,
                           seed=seed, fraction=fraction)
