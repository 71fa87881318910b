import numpy as np
import pytest
from numpy.polynomial import Polynomial

from qfactor.chain import ParameterError, build_level, harmonic_params, qhahn_params
from qfactor.eigen import ladder_eigenvalue
from qfactor.oper import create
from qfactor.qcore import QLattice
from qfactor.qhahn import (
    QHahnLevel,
    dq,
    hahn_create,
    hahn_eigen,
    hahn_equation_residual,
    hahn_family,
    hahn_level,
    hahn_orthogonality,
    poly_on_lattice,
    qinv,
    three_term_residual,
)


def unit_level(q=0.5, a_tilde=1.0, b2=1.0):
    return QHahnLevel(k=3, q=q, a_tilde=a_tilde, b_tilde=0.2, b2=b2, b1=0.0, b0=0.0)


@pytest.mark.parametrize("n, expected", [(0, 0.0), (1, 1.0), (2, 4.5)])
def test_hahn_eigen_examples(n, expected):
    assert hahn_eigen(unit_level(), n) == pytest.approx(expected, abs=1e-14)


def test_monomial_rules():
    q = 0.5
    x2 = Polynomial([0, 0, 1.0])
    np.testing.assert_allclose(dq(qinv(x2, q), q).coef, [0, q**-2 + q**-1], rtol=1e-15)


def test_create_on_one():
    p = qhahn_params(0.5)
    lev = hahn_level(p, 2)
    out = hahn_create(lev, Polynomial([1.0]))
    np.testing.assert_allclose(out.coef, [-lev.b_tilde, -lev.a_tilde], rtol=1e-15)


@pytest.mark.parametrize("k", [1, 2, 4])
def test_create_matches_lattice_operator(k):
    p = qhahn_params(0.5)
    lat = QLattice(0.5, 0, 1.0, 40)
    poly = Polynomial([0.3, -1.0, 2.0])
    exact = poly_on_lattice(hahn_create(hahn_level(p, k), poly), lat).values
    grid = create(build_level(p, lat, k), poly_on_lattice(poly, lat), boundary="nan").values
    m = np.isfinite(grid)
    np.testing.assert_allclose(grid[m], exact[m], rtol=1e-12, atol=1e-12 * np.max(np.abs(exact)))


@pytest.mark.parametrize("q", [0.3, 0.5, 0.7, 0.9])
def test_family_solves_equation(q):
    p = qhahn_params(q, max_k=10)
    fam = hahn_family(p, 8, 8)
    for n, (poly, lam) in enumerate(fam):
        assert poly.degree() == n
        assert hahn_equation_residual(p, 8, poly, lam) < 1e-10
        assert lam == pytest.approx(hahn_eigen(hahn_level(p, 8), n), rel=1e-12, abs=1e-12)
    assert fam[0][0].coef.tolist() == [1.0] and fam[0][1] == 0.0


def test_eigenvalue_is_shifted_ladder_value():
    # the q-Hahn operator is a_k - H_k on polynomials
    p = qhahn_params(0.5)
    k = 4
    for n in range(k + 1):
        assert hahn_eigen(hahn_level(p, k), n) == pytest.approx(p.a(k) - ladder_eigenvalue(p, k, n), rel=1e-12,
                                                                abs=1e-12)


@pytest.mark.parametrize("q", [0.3, 0.5, 0.7])
def test_orthogonality_depth_200(q):
    p = qhahn_params(q, max_k=10)
    G, off = hahn_orthogonality(p, QLattice(q, 0, 1.0, 200), 8, 8)
    assert off < 1e-8
    assert np.all(np.diag(G) > 0)


@pytest.mark.parametrize("n", range(1, 7))
def test_three_term_structure(n):
    assert three_term_residual(qhahn_params(0.5, max_k=10), 8, n) < 1e-8


def test_wrong_family_rejected():
    with pytest.raises(ParameterError):
        hahn_level(harmonic_params(0.5).updated(d_power=-2.0), 1)
    with pytest.raises(ValueError):
        hahn_family(qhahn_params(0.5), 2, 3)

