import numpy as np
import pytest

from app.core.errors import ConfigError, DecompositionError, NumericalFailureError
from app.solver import shrinkage
from app.solver.shrinkage import shrink, svt, truncated_nuclear_norm, truncated_svt


def objective(X, A, tau, r):
    return tau * truncated_nuclear_norm(X, r) + 0.5 * np.linalg.norm(X - A) ** 2


def test_zero_threshold_is_identity():
    A = np.random.default_rng(0).standard_normal((10, 8))
    X = truncated_svt(A, 0.0, 3)
    assert np.linalg.norm(X - A) <= 1e-10 * np.linalg.norm(A)


def test_diagonal_example():
    X = truncated_svt(np.diag([5.0, 3.0, 1.0]), 2.0, 1)
    assert np.allclose(X, np.diag([5.0, 1.0, 0.0]), atol=1e-12)


def test_plain_svt_shrinks_everything():
    X = svt(np.diag([5.0, 3.0, 1.0]), 2.0)
    assert np.allclose(X, np.diag([3.0, 1.0, 0.0]), atol=1e-12)


def test_spectrum_matches_dense_svd():
    rng = np.random.default_rng(1)
    for _ in range(200):
        A = rng.standard_normal((10, 8))
        r = int(rng.integers(0, 8))
        tau = float(rng.uniform(0, 3))

        s = np.linalg.svd(A, compute_uv=False)
        expected = np.concatenate([s[:r], np.maximum(s[r:] - tau, 0.0)])
        got = np.linalg.svd(truncated_svt(A, tau, r), compute_uv=False)
        assert np.allclose(np.sort(got)[::-1], np.sort(expected)[::-1], rtol=0, atol=1e-8)


def test_returned_spectrum():
    A = np.random.default_rng(2).standard_normal((6, 9))
    _, s_new = shrink(A, 0.5, 2)
    s = np.linalg.svd(A, compute_uv=False)
    assert np.allclose(s_new[:2], s[:2])
    assert np.allclose(s_new[2:], np.maximum(s[2:] - 0.5, 0))


def test_beats_random_perturbations():
    # 200 матриц 10×8, у каждой 1000 возмущений с масштабом от 1e-4 до 1
    rng = np.random.default_rng(3)
    for _ in range(200):
        A = rng.standard_normal((10, 8))
        r, tau = int(rng.integers(0, 5)), float(rng.uniform(0.1, 2.0))
        X = truncated_svt(A, tau, r)
        best = objective(X, A, tau, r)

        scales = 10.0 ** rng.uniform(-4.0, 0.0, size=(1000, 1, 1))
        Y = X + scales * rng.standard_normal((1000, *X.shape))
        s = np.linalg.svd(Y, compute_uv=False)
        values = tau * s[:, r:].sum(axis=1) + 0.5 * ((Y - A) ** 2).sum(axis=(1, 2))
        assert values.min() >= best - 1e-10


def test_non_finite_input():
    A = np.ones((3, 3))
    A[1, 1] = np.nan
    with pytest.raises(NumericalFailureError, match="^numerical failure"):
        truncated_svt(A, 1.0, 0)


@pytest.mark.parametrize("tau, r", [(-1.0, 0), (1.0, 3), (1.0, -1)])
def test_bad_parameters(tau, r):
    with pytest.raises(ConfigError):
        truncated_svt(np.eye(3), tau, r)


def test_svd_failure_propagates(monkeypatch):
    def broken(*args, **kwargs):
        raise np.linalg.LinAlgError("SVD did not converge")

    monkeypatch.setattr(shrinkage.scipy.linalg, "svd", broken)
    with pytest.raises(DecompositionError, match="^decomposition failure"):
        truncated_svt(np.eye(3), 1.0, 0)


def test_gesvd_fallback(monkeypatch):
    real_svd = shrinkage.scipy.linalg.svd
    drivers = []

    def flaky(A, **kwargs):
        drivers.append(kwargs["lapack_driver"])
        if kwargs["lapack_driver"] == "gesdd":
            raise np.linalg.LinAlgError("SVD did not converge")
        return real_svd(A, **kwargs)

    monkeypatch.setattr(shrinkage.scipy.linalg, "svd", flaky)
    X = truncated_svt(np.diag([5.0, 3.0, 1.0]), 2.0, 1)
    assert drivers == ["gesdd", "gesvd"]
    assert np.allclose(X, np.diag([5.0, 1.0, 0.0]), atol=1e-12)
