import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qfactor.qcore import (
    DomainError,
    LatticeFn,
    QLattice,
    geometric_lattice,
    infinite_product,
    jackson_integral,
    jacobi_triple_check,
    q_bracket,
    q_derivative,
    q_pochhammer,
    shift_Q,
    shift_Qinv,
)


def test_lattice_points_and_branches():
    lat = QLattice(0.5, 0.25, 1.0, 4)
    assert lat.shape == (2, 4)
    np.testing.assert_allclose(lat.x[0], [1, 0.5, 0.25, 0.125])
    np.testing.assert_allclose(lat.x[1], [0.25, 0.125, 0.0625, 0.03125])
    assert np.all(np.diff(lat.x, axis=1) < 0)
    assert QLattice(0.5, 0.0, 1.0, 4).shape == (1, 4)


@pytest.mark.parametrize("kw", [dict(q=1.0, a=0, b=1, depth=3), dict(q=0.5, a=1, b=1, depth=3),
                                dict(q=0.5, a=-1, b=1, depth=3), dict(q=0.5, a=0, b=1, depth=0)])
def test_lattice_rejects_bad_fields(kw):
    with pytest.raises(ValueError):
        QLattice(**kw)


def test_lattice_fn_shape_checked():
    with pytest.raises(ValueError):
        LatticeFn(QLattice(0.5, 0, 1, 4), np.zeros((1, 3)))


@pytest.mark.parametrize("n, expected", [(0, 0.0), (1, 1.0), (2, 1.5)])
def test_q_bracket(n, expected):
    assert q_bracket(n, 0.5) == pytest.approx(expected, abs=1e-15)


def test_q_derivative_examples():
    lat = QLattice(0.5, 0, 1, 6)
    d = q_derivative(lat.fn(lambda x: x**2))
    np.testing.assert_allclose(d.values[:, :-1], (1.5 * lat.x)[:, :-1], rtol=1e-14)
    assert np.isnan(d.values[0, -1])
    assert np.all(q_derivative(lat.constant(3.0)).values[:, :-1] == 0)
    # direct difference quotient at x = 1
    assert q_derivative(lat.fn(lambda x: x**3)).values[0, 0] == pytest.approx((1 - 0.125) / 0.5, rel=1e-15)


def test_q_derivative_at_zero_is_impossible():
    # a = 0 never stores a point at 0, so the quotient is always defined off the deepest point
    lat = QLattice(0.5, 0, 1, 5)
    assert np.all(lat.x > 0)


@settings(max_examples=30, deadline=None)
@given(st.floats(-3, 3), st.floats(-3, 3), st.integers(0, 2**31))
def test_q_derivative_is_linear(alpha, beta, seed):
    rng = np.random.default_rng(seed)
    lat = QLattice(0.7, 0.2, 1.0, 12)
    f, g = LatticeFn(lat, rng.normal(size=lat.shape)), LatticeFn(lat, rng.normal(size=lat.shape))
    lhs = q_derivative(alpha * f + beta * g).values[:, :-1]
    rhs = (alpha * q_derivative(f) + beta * q_derivative(g)).values[:, :-1]
    scale = np.max(np.abs(q_derivative(f).values[:, :-1])) + np.max(np.abs(q_derivative(g).values[:, :-1]))
    assert np.max(np.abs(lhs - rhs)) <= 1e-14 * scale * (1 + abs(alpha) + abs(beta))


@pytest.mark.parametrize("n", range(0, 6))
def test_q_leibniz_monomials(n):
    lat = QLattice(0.6, 0, 2.0, 10)
    d = q_derivative(lat.fn(lambda x: x * x**n)).values[:, :-1]
    np.testing.assert_allclose(d, (q_bracket(n + 1, 0.6) * lat.x**n)[:, :-1], rtol=1e-12)


def test_shift_operators():
    lat = QLattice(0.5, 0.25, 1.0, 6)
    f = lat.fn(lambda x: x)
    assert shift_Q(f).values[0, 0] == pytest.approx(0.5)
    inv = shift_Qinv(f)
    assert np.all(inv.values[:, 0] == 0.0)
    np.testing.assert_allclose(inv.values[:, 1:], 2 * lat.x[:, 1:])
    back = shift_Qinv(shift_Q(f)).values[:, 1:-1]
    np.testing.assert_allclose(back, f.values[:, 1:-1])
    assert np.all(np.isnan(shift_Qinv(f, boundary="nan").values[:, 0]))


def test_jackson_integral_examples():
    q = 0.5
    one = QLattice(q, 0, 1, 200).constant(1.0)
    assert jackson_integral(one).value == pytest.approx(1.0, abs=1e-14)
    lat = QLattice(q, 0, 1, 200)
    assert jackson_integral(lat.fn(lambda x: x)).value == pytest.approx(1 / (1 + q), abs=1e-14)
    two = QLattice(q, 0.5, 2.0, 200).constant(1.0)
    assert jackson_integral(two).value == pytest.approx(1.5, abs=1e-14)
    bad = LatticeFn(lat, np.full(lat.shape, np.nan))
    with pytest.raises(DomainError):
        jackson_integral(bad)


@pytest.mark.parametrize("m", [1, 2, 3, 4])
@pytest.mark.parametrize("a", [0.0, 0.3])
def test_jackson_telescopes(m, a):
    q, b, N = 0.7, 1.3, 60
    lat = QLattice(q, a, b, N)
    F = lat.fn(lambda x: x**m)
    d = q_derivative(F)
    # the deepest derivative needs F(q^N y): supply it explicitly
    vals = d.values.copy()
    deep = q * lat.x[:, -1]
    vals[:, -1] = (F.values[:, -1] - deep**m) / ((1 - q) * lat.x[:, -1])
    got = jackson_integral(LatticeFn(lat, vals)).value
    expected = (b**m - (q**N * b) ** m) - (a**m - (q**N * a) ** m)
    assert got == pytest.approx(expected, abs=1e-12)


def test_q_pochhammer_examples():
    assert q_pochhammer(0.5, 0.5, 2) == pytest.approx(0.375, abs=1e-16)
    assert q_pochhammer(0.0, 0.5) == 1.0
    oracle = float(mpmath.qp(0.5, 0.5))
    assert q_pochhammer(0.5, 0.5) == pytest.approx(oracle, rel=1e-14)
    assert oracle == pytest.approx(0.2887880951, abs=1e-10)


@settings(max_examples=40, deadline=None)
@given(st.floats(-2, 2), st.floats(0.05, 0.95), st.integers(0, 12))
def test_q_pochhammer_recursion(a, q, n):
    assert q_pochhammer(a, q, n + 1) == q_pochhammer(a, q, n) * (1 - q**n * a)


def test_infinite_product_reports_stop_reason():
    res = infinite_product(lambda m: np.array(1 - 0.5 ** (m + 1)))
    assert res.stopped_by == "tolerance"
    capped = infinite_product(lambda m: np.array(1.0 + 1.0 / (m + 1) ** 2), cap=50)
    assert capped.stopped_by == "cap" and capped.terms == 50


@pytest.mark.parametrize("q", [0.2, 0.5])
@pytest.mark.parametrize("x", [0.5, 1.0, 2.0])
def test_jacobi_triple(q, x):
    lhs, rhs = jacobi_triple_check(x, q)
    assert lhs == pytest.approx(rhs, rel=1e-10)


def test_jacobi_triple_examples():
    lhs, rhs = jacobi_triple_check(1.0, 0.3, K=20)
    assert abs(lhs - rhs) < 1e-12
    lhs, rhs = jacobi_triple_check(-1.0, 0.3)
    assert lhs == pytest.approx(rhs, rel=1e-12)
    lhs, rhs = jacobi_triple_check(1.0, 1e-9)
    assert lhs == pytest.approx(1.0, abs=1e-8) and rhs == pytest.approx(1.0, abs=1e-8)
    with pytest.raises(DomainError):
        jacobi_triple_check(0.0, 0.3)


def test_geometric_lattice_reaches_x_min():
    lat = geometric_lattice(0.5, 1.0, 1e-3)
    assert lat.x[0, -1] <= 1e-3 < lat.x[0, -2]
