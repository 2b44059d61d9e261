import numpy as np
import pytest

from app.core.errors import EmbeddingTooLargeError, FoldShapeError, InconsistentTensorError
from app.embedding import (EmbeddingSpec, HankelTensor, dump_tensor, hankelize, inverse_hankelize,
                           load_tensor, multiplicity, st_fold, st_unfold)

X23 = np.array([[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]])


def naive_hankel(X, tau_s, tau_t):
    n, t = X.shape
    out = np.empty((tau_s, tau_t, n - tau_s + 1, t - tau_t + 1))
    for i in range(n - tau_s + 1):
        for j in range(t - tau_t + 1):
            out[:, :, i, j] = X[i:i + tau_s, j:j + tau_t]
    return out


def random_case(rng):
    n, t = rng.integers(3, 41, size=2)
    tau_s = int(rng.integers(1, n + 1))
    tau_t = int(rng.integers(1, t + 1))
    return rng.standard_normal((n, t)), EmbeddingSpec(tau_s, tau_t)


# --- hankelize ---

def test_unit_windows_copy_matrix():
    X = np.random.default_rng(0).standard_normal((4, 5))
    H = hankelize(X, EmbeddingSpec(1, 1))
    assert H.data.shape == (1, 1, 4, 5)
    assert np.array_equal(H.data[0, 0], X)


def test_small_example_slices():
    H = hankelize(X23, EmbeddingSpec(2, 2))
    assert H.data.shape == (2, 2, 1, 2)
    assert H.data[:, :, 0, 0].tolist() == [[1, 2], [4, 5]]
    assert H.data[:, :, 0, 1].tolist() == [[2, 3], [5, 6]]


def test_matches_naive_windows():
    rng = np.random.default_rng(1)
    for _ in range(20):
        X, spec = random_case(rng)
        assert np.array_equal(hankelize(X, spec).data, naive_hankel(X, spec.tau_s, spec.tau_t))


def test_full_road_scale_shape():
    spec = EmbeddingSpec(40, 30)
    assert spec.tensor_shape((130, 480)) == (40, 30, 91, 451)
    assert spec.unfolded_shape((130, 480)) == (1200, 91 * 451)


def test_embedding_too_large():
    with pytest.raises(EmbeddingTooLargeError, match="^embedding too large"):
        hankelize(X23, EmbeddingSpec(3, 1))


def test_degenerate_full_window():
    H = hankelize(X23, EmbeddingSpec(2, 3))
    assert H.data.shape == (2, 3, 1, 1)
    assert np.array_equal(inverse_hankelize(H), X23)


# --- inverse_hankelize / multiplicity ---

def test_inverse_round_trip_random():
    rng = np.random.default_rng(2)
    for _ in range(100):
        X, spec = random_case(rng)
        back = inverse_hankelize(hankelize(X, spec))
        assert np.linalg.norm(back - X) <= 1e-12 * max(np.linalg.norm(X), 1.0)


def test_inverse_averages_copies():
    H = hankelize(X23, EmbeddingSpec(2, 2))
    data = H.data.copy()
    # Ячейка (1, 2) в нумерации с 1 накрыта двумя окнами
    data[0, 1, 0, 0] = 0.0
    data[0, 0, 0, 1] = 4.0
    out = inverse_hankelize(HankelTensor(data, H.spec, H.source_shape))
    assert out[0, 1] == pytest.approx(2.0)


def test_multiplicity_formula():
    n, t, tau_s, tau_t = 7, 9, 3, 4
    counts = multiplicity((n, t), tau_s, tau_t)
    brute = np.zeros((n, t))
    for i in range(n - tau_s + 1):
        for j in range(t - tau_t + 1):
            brute[i:i + tau_s, j:j + tau_t] += 1
    assert np.array_equal(counts, brute)
    assert not counts.flags.writeable


def test_sum_over_tensor_is_weighted_sum_over_cells():
    rng = np.random.default_rng(3)
    X = rng.standard_normal((8, 11))
    spec = EmbeddingSpec(3, 5)
    weighted = (multiplicity(X.shape, 3, 5) * X).sum()
    assert hankelize(X, spec).data.sum() == pytest.approx(weighted, rel=1e-12)


def test_linearity():
    rng = np.random.default_rng(4)
    X, Y = rng.standard_normal((2, 6, 7))
    spec = EmbeddingSpec(2, 3)
    lhs = hankelize(2.0 * X - 3.0 * Y, spec).data
    rhs = 2.0 * hankelize(X, spec).data - 3.0 * hankelize(Y, spec).data
    assert np.allclose(lhs, rhs, rtol=0, atol=1e-12)


def test_inconsistent_tensor():
    H = HankelTensor(np.zeros((2, 2, 2, 2)), EmbeddingSpec(2, 2), (2, 3))
    with pytest.raises(InconsistentTensorError, match="^inconsistent tensor"):
        inverse_hankelize(H)


# --- st_unfold / st_fold ---

def test_unfold_small_example():
    M = st_unfold(hankelize(X23, EmbeddingSpec(2, 2)))
    assert M.shape == (4, 2)
    assert M[:, 0].tolist() == [1, 4, 2, 5]
    assert M[:, 1].tolist() == [2, 5, 3, 6]


def test_unit_windows_unfold_is_column_major_vector():
    X = np.arange(12.0).reshape(3, 4)
    M = st_unfold(hankelize(X, EmbeddingSpec(1, 1)))
    assert M.shape == (1, 12)
    assert np.array_equal(M[0], X.ravel(order="F"))
    back = st_fold(M, EmbeddingSpec(1, 1), (3, 4))
    assert np.array_equal(inverse_hankelize(back), X)


def test_fold_unfold_round_trips():
    rng = np.random.default_rng(5)
    for _ in range(100):
        X, spec = random_case(rng)
        H = hankelize(X, spec)
        assert np.array_equal(st_fold(st_unfold(H), spec, X.shape).data, H.data)

        M = rng.standard_normal(spec.unfolded_shape(X.shape))
        assert np.array_equal(st_unfold(st_fold(M, spec, X.shape)), M)


def test_fold_shape_error():
    with pytest.raises(FoldShapeError, match="^fold shape error"):
        st_fold(np.zeros((3, 2)), EmbeddingSpec(2, 2), (2, 3))


def test_shrinkage_breaks_hankel_consistency():
    # Сжатие ранга портит ганкелеву структуру; H⁻¹ её восстанавливает усреднением
    rng = np.random.default_rng(6)
    X = rng.standard_normal((6, 8))
    spec = EmbeddingSpec(3, 3)
    M = st_unfold(hankelize(X, spec))
    U, s, Vt = np.linalg.svd(M, full_matrices=False)
    low = (U[:, :1] * s[:1]) @ Vt[:1]
    tensor = st_fold(low, spec, X.shape)
    back = hankelize(inverse_hankelize(tensor), spec)
    assert not np.allclose(back.data, tensor.data)


# --- дампы ---

def test_dump_round_trip(tmp_path):
    H = hankelize(np.random.default_rng(7).standard_normal((5, 6)), EmbeddingSpec(2, 3))
    path = tmp_path / "h.bin"
    dump_tensor(H, path)

    raw = path.read_bytes()
    header = np.frombuffer(raw[:64], dtype="<i8")
    assert header[2:].tolist() == [2, 3, 5, 6, 6, 16]
    assert len(raw) == 64 + 8 * H.data.size

    loaded = load_tensor(path)
    assert loaded.spec == H.spec and loaded.source_shape == (5, 6)
    assert np.array_equal(loaded.data, H.data)


def test_dump_rejects_foreign_file(tmp_path):
    path = tmp_path / "junk.bin"
    path.write_bytes(b"\x00" * 80)
    with pytest.raises(InconsistentTensorError):
        load_tensor(path)
