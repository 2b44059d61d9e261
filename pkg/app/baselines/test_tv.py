import numpy as np
import pytest

from app.baselines.tv import TvProx, grad, grad_adjoint, tv_regularizer


def test_constant_matrix_has_zero_variation():
    assert tv_regularizer(np.full((4, 5), 7.0)) == 0.0


def test_two_by_two_example():
    assert tv_regularizer(np.array([[1.0, 2.0], [3.0, 5.0]])) == 8.0


def test_row_vector():
    x = np.array([[1.0, 4.0, 2.0, 2.5]])
    assert tv_regularizer(x) == pytest.approx(3.0 + 2.0 + 0.5)


def test_seminorm_properties():
    rng = np.random.default_rng(0)
    for _ in range(50):
        X, Y = rng.standard_normal((2, 6, 7))
        a = float(rng.uniform(-3, 3))
        assert tv_regularizer(X) >= 0
        assert tv_regularizer(a * X) == pytest.approx(abs(a) * tv_regularizer(X))
        assert tv_regularizer(X + Y) <= tv_regularizer(X) + tv_regularizer(Y) + 1e-12
        assert tv_regularizer(X + 3.0) == pytest.approx(tv_regularizer(X))


def test_adjoint_of_gradient():
    rng = np.random.default_rng(1)
    x = rng.standard_normal((5, 6))
    g_v, g_h = rng.standard_normal((4, 6)), rng.standard_normal((5, 5))
    dx_v, dx_h = grad(x)
    lhs = (dx_v * g_v).sum() + (dx_h * g_h).sum()
    assert lhs == pytest.approx((x * grad_adjoint(g_v, g_h)).sum(), rel=1e-12)


def test_prox_with_zero_weight_is_identity():
    v = np.random.default_rng(2).standard_normal((4, 4))
    assert np.allclose(TvProx(v.shape)(v, 0.0), v)


def test_prox_smooths_and_preserves_mean():
    rng = np.random.default_rng(3)
    v = rng.standard_normal((8, 8))
    x = TvProx(v.shape, tol=1e-10, max_iters=2000)(v, 0.3)
    assert tv_regularizer(x) < tv_regularizer(v)
    assert x.mean() == pytest.approx(v.mean(), abs=1e-10)
    # Проксимальный шаг не хуже самого v по своей цели
    goal = lambda y: 0.5 * np.linalg.norm(y - v) ** 2 + 0.3 * tv_regularizer(y)
    assert goal(x) <= goal(v)


def test_large_weight_flattens():
    v = np.random.default_rng(4).standard_normal((5, 5))
    x = TvProx(v.shape, tol=1e-12, max_iters=5000)(v, 100.0)
    assert np.allclose(x, v.mean(), atol=1e-3)


def test_prox_reports_inner_iterations():
    v = np.random.default_rng(5).standard_normal((6, 6))
    capped = TvProx(v.shape, tol=1e-15, max_iters=3)
    capped(v, 0.5)
    assert capped.last_iters == 3

    loose = TvProx(v.shape, tol=10.0, max_iters=50)
    loose(v, 0.5)
    assert loose.last_iters == 1
