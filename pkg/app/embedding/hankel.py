"""
Двусторонняя (пространство × время) задержка: матрица N×T превращается в
тензор τs × τt × (N−τs+1) × (T−τt+1), срез (:, :, i, j) которого равен окну
X[i:i+τs, j:j+τt]. Обратное преобразование усредняет все копии ячейки.
"""
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Tuple

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from app.core.errors import EmbeddingTooLargeError, FoldShapeError, InconsistentTensorError, InputError
from app.core.io import atomic_write

DUMP_MAGIC = 0x48544E53  # "HTNS"
DUMP_VERSION = 1


@dataclass(frozen=True)
class EmbeddingSpec:
    tau_s: int  # окно по пространству, в ячейках
    tau_t: int  # окно по времени, в ячейках

    def validate(self, shape: Tuple[int, int]):
        n, t = shape
        if not (1 <= self.tau_s <= n and 1 <= self.tau_t <= t):
            raise EmbeddingTooLargeError(
                f"tau_s={self.tau_s}, tau_t={self.tau_t} for a {n}x{t} field")

    def tensor_shape(self, shape: Tuple[int, int]) -> Tuple[int, int, int, int]:
        n, t = shape
        return self.tau_s, self.tau_t, n - self.tau_s + 1, t - self.tau_t + 1

    def unfolded_shape(self, shape: Tuple[int, int]) -> Tuple[int, int]:
        a, b, i, j = self.tensor_shape(shape)
        return a * b, i * j


@dataclass(frozen=True)
class HankelTensor:
    data: np.ndarray
    spec: EmbeddingSpec
    source_shape: Tuple[int, int]

    @property
    def p(self) -> int:
        return self.spec.tau_s * self.spec.tau_t

    @property
    def q(self) -> int:
        _, _, i, j = self.spec.tensor_shape(self.source_shape)
        return i * j

    @property
    def dim(self) -> Tuple[int, int, int, int]:
        return self.spec.tensor_shape(self.source_shape)

    def check(self):
        if self.data.shape != self.dim:
            raise InconsistentTensorError(
                f"data shape {self.data.shape} != {self.dim} for source {self.source_shape}")


def hankelize(values: np.ndarray, spec: EmbeddingSpec) -> HankelTensor:
    values = np.asarray(values, dtype=np.float64)
    if values.ndim != 2:
        raise InputError("hankelize expects a 2-D matrix")
    spec.validate(values.shape)

    # sliding_window_view: (N−τs+1, T−τt+1, τs, τt) -> (τs, τt, N−τs+1, T−τt+1)
    windows = sliding_window_view(values, (spec.tau_s, spec.tau_t))
    data = np.ascontiguousarray(windows.transpose(2, 3, 0, 1))
    return HankelTensor(data=data, spec=spec, source_shape=values.shape)


@lru_cache(maxsize=32)
def multiplicity(shape: Tuple[int, int], tau_s: int, tau_t: int) -> np.ndarray:
    """Сколько окон накрывает ячейку (i, j): min(i, τs, N−τs+1, N−i+1) по каждой оси (индексы с 1)."""
    n, t = shape

    def axis_counts(length, tau):
        idx = np.arange(1, length + 1)
        return np.minimum.reduce([idx, np.full(length, tau), np.full(length, length - tau + 1), length - idx + 1])

    counts = np.outer(axis_counts(n, tau_s), axis_counts(t, tau_t)).astype(np.float64)
    counts.setflags(write=False)
    return counts


def inverse_hankelize(tensor: HankelTensor) -> np.ndarray:
    tensor.check()
    n, t = tensor.source_shape
    tau_s, tau_t, n_i, n_j = tensor.dim

    out = np.zeros((n, t))
    for a in range(tau_s):
        for b in range(tau_t):
            out[a:a + n_i, b:b + n_j] += tensor.data[a, b]
    return out / multiplicity((n, t), tau_s, tau_t)


def st_unfold(tensor: HankelTensor) -> np.ndarray:
    """Столбцово-мажорный reshape в p×q: каждый столбец есть развёрнутый по столбцам патч τs×τt."""
    tensor.check()
    return tensor.data.reshape((tensor.p, tensor.q), order="F")


def st_fold(matrix: np.ndarray, spec: EmbeddingSpec, source_shape: Tuple[int, int]) -> HankelTensor:
    spec.validate(source_shape)
    dim = spec.tensor_shape(source_shape)
    if matrix.shape != spec.unfolded_shape(source_shape):
        raise FoldShapeError(f"{matrix.shape} cannot fold into {dim}")
    data = np.reshape(matrix, dim, order="F")
    return HankelTensor(data=data, spec=spec, source_shape=tuple(source_shape))


def unfold_matrix(values: np.ndarray, spec: EmbeddingSpec) -> np.ndarray:
    """st_unfold(hankelize(values)) без промежуточного объекта."""
    return st_unfold(hankelize(values, spec))


def fold_matrix(matrix: np.ndarray, spec: EmbeddingSpec, source_shape: Tuple[int, int]) -> np.ndarray:
    """inverse_hankelize(st_fold(matrix))."""
    return inverse_hankelize(st_fold(matrix, spec, source_shape))


# --- ОТЛАДОЧНЫЕ ДАМПЫ ---

def dump_tensor(tensor: HankelTensor, path: str | Path):
    """Заголовок из 8 int64 (magic, version, τs, τt, N, T, p, q), затем float64 по столбцам."""
    tensor.check()
    header = np.array([DUMP_MAGIC, DUMP_VERSION, tensor.spec.tau_s, tensor.spec.tau_t,
                       *tensor.source_shape, tensor.p, tensor.q], dtype="<i8")
    with atomic_write(path, "wb") as f:
        f.write(header.tobytes())
        f.write(np.asarray(tensor.data, dtype="<f8").tobytes(order="F"))


def load_tensor(path: str | Path) -> HankelTensor:
    raw = Path(path).read_bytes()
    header = np.frombuffer(raw[:64], dtype="<i8")
    if header.size != 8 or header[0] != DUMP_MAGIC or header[1] != DUMP_VERSION:
        raise InconsistentTensorError(f"{path} is not a tensor dump")

    tau_s, tau_t, n, t, p, q = (int(v) for v in header[2:])
    spec = EmbeddingSpec(tau_s, tau_t)
    spec.validate((n, t))
    if (p, q) != spec.unfolded_shape((n, t)):
        raise InconsistentTensorError(f"header p={p}, q={q} disagrees with the embedding")

    flat = np.frombuffer(raw[64:], dtype="<f8")
    if flat.size != p * q:
        raise InconsistentTensorError(f"{path}: expected {p * q} values, found {flat.size}")
    data = flat.reshape(spec.tensor_shape((n, t)), order="F").copy()
    return HankelTensor(data=data, spec=spec, source_shape=(n, t))
