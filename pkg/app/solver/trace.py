import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import List

import numpy as np

from app.core.io import atomic_write, fmt
from app.grid.speed_field import SpeedField

TRACE_HEADER = "iter,rel_change,rho,tnn_value,wall_ms"


@dataclass(frozen=True)
class TraceRecord:
    iter: int
    relative_change: float
    rho: float
    truncated_norm_value: float
    wall_ms: float


@dataclass
class ConvergenceTrace:
    records: List[TraceRecord] = field(default_factory=list)

    def append(self, record: TraceRecord):
        self.records.append(record)

    def __len__(self):
        return len(self.records)

    @property
    def relative_changes(self) -> np.ndarray:
        return np.array([r.relative_change for r in self.records])

    @property
    def rhos(self) -> np.ndarray:
        return np.array([r.rho for r in self.records])

    def write_csv(self, path: str | Path):
        with atomic_write(path) as f:
            f.write(TRACE_HEADER + "\n")
            for r in self.records:
                f.write(f"{r.iter},{fmt(r.relative_change)},{fmt(r.rho)},"
                        f"{fmt(r.truncated_norm_value)},{fmt(r.wall_ms)}\n")


class IterationClock:
    """Время одной итерации и всего прогона."""

    def __init__(self):
        self.start_time = time.perf_counter()
        self.last_time = self.start_time

    def lap_ms(self) -> float:
        now = time.perf_counter()
        elapsed = (now - self.last_time) * 1000
        self.last_time = now
        return elapsed

    def total_s(self) -> float:
        return time.perf_counter() - self.start_time


@dataclass
class ImputationResult:
    completed: SpeedField
    trace: ConvergenceTrace
    converged: bool
    iterations: int
    wall_time_s: float = 0.0
    method: str = ""
