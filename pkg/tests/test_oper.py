import numpy as np
import pytest
from cases import families

from qfactor.chain import build_level, harmonic_params, qhahn_params
from qfactor.oper import (
    adjoint_check,
    annihilate,
    annihilate_shift_form,
    apply_H,
    create,
    create_shift_form,
    display_hamiltonian,
    factorization_residuals,
    factorized_H,
    hamiltonian,
    sup_residual,
    weighted_norm,
)
from qfactor.qcore import QLattice, geometric_lattice


def smooth(lat, c=(0.3, -1.0, 0.5, 2.0)):
    return lat.fn(lambda x: np.polyval(c, x) * np.exp(-x))


@pytest.mark.parametrize("name", ["qhahn", "harmonic", "isotropic"])
@pytest.mark.parametrize("k", [0, 1, 3])
def test_shift_forms_agree(name, k):
    p = families(0.5)[name]
    lat = geometric_lattice(0.5, 1.0, 1e-3)
    lev = build_level(p, lat, k)
    psi = smooth(lat)
    assert sup_residual(annihilate(lev, psi) - annihilate_shift_form(lev, psi), psi) < 1e-12
    assert sup_residual(create(lev, psi) - create_shift_form(lev, psi), psi) < 1e-12 * np.max(1 / lat.x)


def test_annihilate_example():
    # f_k = 0 on the polynomial chain, so A_k x^2 = [2] x
    p = qhahn_params(0.5)
    lat = QLattice(0.5, 0, 1.0, 20)
    out = annihilate(build_level(p, lat, 2), lat.fn(lambda x: x**2))
    np.testing.assert_allclose(out.values[:, :-1], (1.5 * lat.x)[:, :-1], rtol=1e-9)


def test_create_boundary_conventions():
    p = harmonic_params(0.5)
    lat = QLattice(0.5, 0, 1.0, 8)
    lev = build_level(p, lat, 1)
    psi = smooth(lat)
    assert np.all(np.isnan(create(lev, psi, boundary="nan").values[:, 0]))
    assert np.all(np.isfinite(create(lev, psi).values))


def test_adjoint_exact_when_weight_vanishes_at_b():
    p = qhahn_params(0.5)
    lat = QLattice(0.5, 0, 1.0, 200)
    lev = build_level(p, lat, 2)
    left, right = adjoint_check(lev, smooth(lat), lat.fn(lambda x: x**2 + 1))
    assert left == pytest.approx(right, abs=1e-12 * max(abs(left), 1.0))


def test_adjoint_gap_is_deep_truncation():
    p = harmonic_params(0.5)
    gaps = []
    for x_min in (1e-3, 1e-6):
        lat = geometric_lattice(0.5, 4.0, x_min)
        left, right = adjoint_check(build_level(p, lat, 2), lat.fn(lambda x: np.exp(-x) * (1 + x)),
                                    lat.fn(lambda x: x**2 * np.exp(-2 * x)))
        gaps.append(abs(left - right) / abs(left))
    assert gaps[1] < 1e-9 < gaps[0]


@pytest.mark.parametrize("name", ["qhahn", "harmonic", "isotropic"])
@pytest.mark.parametrize("k", [0, 1, 2, 3, 4])
def test_factorizations(name, k):
    q = 0.5
    p = families(q)[name]
    lat = geometric_lattice(q, 1.0, 0.05, extended_precision=True)
    r = factorization_residuals(p, lat, k, smooth(lat))
    assert r.identity < 1e-10
    assert r.intertwining < 1e-10
    assert r.commutator < 1e-10


def test_stencil_reproduces_apply():
    p = families(0.5)["isotropic"]
    lat = geometric_lattice(0.5, 1.0, 0.05)
    op = hamiltonian(build_level(p, lat, 2))
    psi = smooth(lat)
    c_out, c_mid, c_in = op.stencil()
    v = psi.values
    direct = c_mid * v
    direct[:, :-1] += c_in[:, :-1] * v[:, 1:]
    direct[:, 1:] += c_out[:, 1:] * v[:, :-1]
    Hpsi = apply_H(op, psi).values
    np.testing.assert_allclose(direct[:, 1:-1], Hpsi[:, 1:-1], rtol=1e-10, atol=1e-10 * np.max(np.abs(Hpsi[:, 1:-1])))


@pytest.mark.parametrize("name", ["qhahn", "harmonic", "isotropic"])
@pytest.mark.parametrize("k", [0, 2])
def test_display_form_matches_factorized(name, k):
    p = families(0.5)[name]
    lat = geometric_lattice(0.5, 1.0, 0.05, extended_precision=True)
    lev = build_level(p, lat, k)
    psi = smooth(lat)
    ref = factorized_H(lev, psi)
    assert sup_residual(apply_H(display_hamiltonian(p, lat, k), psi) - ref, ref) < 1e-10


def test_weighted_norm_example():
    lat = QLattice(0.5, 0, 1.0, 200)
    one = lat.constant(1.0)
    assert weighted_norm(one, one) == pytest.approx(1.0, abs=1e-14)
