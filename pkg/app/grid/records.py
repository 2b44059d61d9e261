import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
import pandas as pd

from app.core.errors import EmptyObservationsError, InputError, MalformedRecordError
from app.core.io import atomic_write, read_csv_table

logger = logging.getLogger(__name__)

COLUMNS = ("vehicle_id", "time_s", "position_ft", "speed_fts")


@dataclass(frozen=True)
class TrajectoryRecord:
    vehicle_id: int
    time: float       # секунды
    position: float   # футы вдоль дороги
    speed: float      # фут/с


def records_to_frame(records: Sequence[TrajectoryRecord] | pd.DataFrame) -> pd.DataFrame:
    """Приводит записи к таблице с колонками COLUMNS и проверяет их."""
    if isinstance(records, pd.DataFrame):
        frame = records.loc[:, list(COLUMNS)].copy()
    else:
        frame = pd.DataFrame(
            [(r.vehicle_id, r.time, r.position, r.speed) for r in records],
            columns=list(COLUMNS),
        )
    return validate_frame(frame)


def validate_frame(frame: pd.DataFrame) -> pd.DataFrame:
    numeric = frame.apply(pd.to_numeric, errors="coerce").astype(float)
    values = numeric.to_numpy()

    bad = ~np.isfinite(values).all(axis=1)
    bad |= (values[:, 1:] < 0).any(axis=1)
    ids = values[:, 0]
    with np.errstate(invalid="ignore"):
        bad |= np.isfinite(ids) & (ids != np.round(ids))

    if bad.any():
        row = int(np.flatnonzero(bad)[0]) + 1
        raise MalformedRecordError(str(frame.iloc[row - 1].to_dict()), row=row)

    numeric["vehicle_id"] = numeric["vehicle_id"].astype(np.int64)
    return numeric.reset_index(drop=True)


def load_trajectories(path: str | Path) -> pd.DataFrame:
    """
    Читает CSV траекторий: vehicle_id,time_s,position_ft,speed_fts.
    Номер строки в ошибке считается по строкам данных, начиная с 1 (заголовок не считается).
    """
    frame = read_csv_table(path, header_lines=1)
    missing = set(COLUMNS) - set(frame.columns)
    if missing:
        raise InputError(f"missing columns {sorted(missing)} in {path}")
    if frame.empty:
        raise EmptyObservationsError(f"{path} has no rows")

    frame = validate_frame(frame.loc[:, list(COLUMNS)])
    logger.info("Загружено %d записей, %d машин из %s",
                len(frame), frame["vehicle_id"].nunique(), path)
    return frame


def write_vehicle_ids(path: str | Path, ids: Iterable[int]):
    with atomic_write(path) as f:
        for vehicle_id in sorted(ids):
            f.write(f"{vehicle_id}\n")


def read_vehicle_ids(path: str | Path) -> set[int]:
    ids = set()
    for n, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        try:
            ids.add(int(line))
        except ValueError:
            raise MalformedRecordError(f"vehicle id {line!r}", row=n) from None
    return ids
