"""Constant-weight chains: the q-harmonic oscillator and its 3D isotropic analogue.

HARMONIC has gamma = 1, d_k = 1/q, B0 = 1; ISOTROPIC_3D has gamma = 2,
d_k = q**-2, B0 = 1 (through b1).  Both are built on the generic chain, and the
closed forms here are checked against it.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .chain import ChainParams, ParameterError, build_level, harmonic_params, isotropic_params
from .eigen import EigenPair, membership
from .oper import annihilate, create
from .qcore import (
    DomainError,
    LatticeFn,
    QLattice,
    q_bracket,
    q_factorial,
    q_pochhammer,
    quadratic_pochhammer,
    shift_pow,
    shift_Q,
    shift_Qinv,
)


class Variant(Enum):
    HARMONIC = "harmonic"
    ISOTROPIC_3D = "isotropic_3d"


@dataclass(frozen=True)
class OscillatorCase:
    variant: Variant
    q: float
    a0: float = 1.0
    a1: float = 0.5
    h: float = 0.3
    max_k: int = 8

    def params(self) -> ChainParams:
        make = harmonic_params if self.variant is Variant.HARMONIC else isotropic_params
        return make(self.q, a0=self.a0, a1=self.a1, h=self.h, max_k=self.max_k)

    def radicand(self, x):
        q, a0, a1, h = self.q, self.a0, self.a1, self.h
        x = np.asarray(x, dtype=float)
        if self.variant is Variant.HARMONIC:
            return q**2 * (a0 / q - a1) / (1 - q) + h / x + 1 / ((1 - q) ** 2 * x**2)
        return q**4 * (a0 / q**2 - a1) / (1 - q**2) + h / x**2

    def f0(self, x):
        rad = self.radicand(x)
        if np.any(~(rad > 0)):
            raise DomainError("f0 radicand is not positive on the requested points")
        return np.sqrt(rad) - 1 / ((1 - self.q) * np.asarray(x, dtype=float))


def harmonic_case(q: float, **kw) -> OscillatorCase:
    return OscillatorCase(Variant.HARMONIC, q, **kw)


def isotropic_case(q: float, a0: float = 1.0, a1: float = 0.5, h: float = 0.5, **kw) -> OscillatorCase:
    return OscillatorCase(Variant.ISOTROPIC_3D, q, a0=a0, a1=a1, h=h, **kw)


def osc_xi(case: OscillatorCase, k: int) -> float:
    """Power of the 3D ground state: xi_k = -k + log_q((1-q) sqrt h)."""
    if case.h <= 0:
        raise ParameterError("the 3D ground state needs h > 0")
    q = case.q
    return -k + float(np.log((1 - q) * np.sqrt(case.h)) / np.log(q))


def osc_spectrum(case: OscillatorCase, k: int, n: int) -> float:
    """Eigenvalue lambda_k^n of the oscillator Lemmas."""
    q, a0, a1 = case.q, case.a0, case.a1
    if n < 0 or k < 0:
        raise ValueError("k and n must be non-negative")
    if case.variant is Variant.HARMONIC:
        return float(q ** (-2 * k + n) * (a0 + (q**2 * a1 - a0) * q_bracket(k - n, q)))
    if n > k:
        raise ValueError(f"the 3D ladder needs n <= k, got n={n}, k={k}")
    return float(q ** (-2 * (2 * k - n)) * (a0 + (q**4 * a1 - a0) * q_bracket(2 * (k - n), q) / q_bracket(2, q)))


def ground_values(case: OscillatorCase, x: np.ndarray, k: int) -> np.ndarray:
    q = case.q
    if case.variant is Variant.HARMONIC:
        # roots x1, x2 of c2 x^2 + c1 x + 1 enter only through 1 + c1 t + c2 t^2
        c1 = (1 - q) ** 2 * case.h
        c2 = (1 - q) * q**2 * (case.a0 / q - case.a1)
        prod = quadratic_pochhammer(c1, c2, q ** (-k) * x, q)
        power = 1.0
    else:
        c = q**4 * (case.a0 / q**2 - case.a1) / ((1 - q**2) * case.h)
        prod = q_pochhammer(-c * q ** (-2 * k) * x**2, q**2)
        power = x ** osc_xi(case, k)
    if np.any(~(prod > 0)):
        raise DomainError("ground-state product is not positive on the lattice")
    return power / np.sqrt(prod)


def _normalize(case: OscillatorCase, psi: LatticeFn, k: int) -> tuple[LatticeFn, bool]:
    try:
        member, _ = membership(case.params(), k)
    except ParameterError:
        member = False
    if not member:
        return psi, False
    lat = psi.lattice
    rho = build_level(case.params(), lat, k).rhok.values
    norm2 = np.sum((1 - lat.q) * lat.x * np.abs(rho) * psi.values**2)
    return psi / np.sqrt(norm2), True


def osc_ground(case: OscillatorCase, lattice: QLattice, k: int, normalize: bool = True) -> EigenPair:
    """psi_k^0 from the Pochhammer closed forms; eigenvalue a_k."""
    psi = LatticeFn(lattice, ground_values(case, lattice.x, k))
    done = False
    if normalize:
        psi, done = _normalize(case, psi, k)
    return EigenPair(psi, osc_spectrum(case, k, 0), 0, k, case.params(), done)


def commutation_check(case: OscillatorCase, lattice: QLattice, k: int, psi: LatticeFn) -> dict[str, float]:
    """Relative deviations of the four Q-commutation relations applied to psi.

    q A*_k Q^-1 = Q^-1 A*_{k-1},  A*_k Q = q Q A*_{k+1},
    q A_k Q^-1 = Q^-1 A_{k-1},    A_k Q = q Q A_{k+1}.
    Points that need values outside the lattice are skipped.
    """
    if k < 1:
        raise ValueError("the relations involve level k-1, so k >= 1")
    p, q = case.params(), case.q
    lev = {j: build_level(p, lattice, j) for j in (k - 1, k, k + 1)}
    up = lambda j, f: create(lev[j], f, boundary="nan")  # noqa: E731
    down = lambda j, f: annihilate(lev[j], f)  # noqa: E731
    Qi = lambda f: shift_Qinv(f, boundary="nan")  # noqa: E731
    pairs = {
        "create_Qinv": (q * up(k, Qi(psi)), Qi(up(k - 1, psi))),
        "create_Q": (up(k, shift_Q(psi)), q * shift_Q(up(k + 1, psi))),
        "annihilate_Qinv": (q * down(k, Qi(psi)), Qi(down(k - 1, psi))),
        "annihilate_Q": (down(k, shift_Q(psi)), q * shift_Q(down(k + 1, psi))),
    }
    out = {}
    for name, (lhs, rhs) in pairs.items():
        m = np.isfinite(lhs.values) & np.isfinite(rhs.values)
        if not m.any():
            out[name] = 0.0
            continue
        scale = np.max(np.abs(lhs.values[m])) + np.max(np.abs(rhs.values[m]))
        out[name] = float(np.max(np.abs(lhs.values - rhs.values)[m]) / scale) if scale > 0 else 0.0
    return out


def harmonic_normalization(case: OscillatorCase, k: int, n: int) -> float:
    """1 / sqrt((a0 - q a1)^n [n]! q^(n(n-1)+k))."""
    q = case.q
    base = case.a0 - q * case.a1
    if base <= 0:
        raise ParameterError("the harmonic normalization needs a0 > q a1")
    return float(1 / np.sqrt(base**n * q_factorial(n, q) * q ** (n * (n - 1) + k)))


def osc_state(case: OscillatorCase, lattice: QLattice, k: int, n: int) -> EigenPair:
    """psi_k^n of the oscillator Lemmas.

    HARMONIC: C Q^(n-k) A*_n ... A*_1 psi_0^0 with psi_0^0 unit-normalized on
    ``lattice`` and C the Lemma constant (skipped, with ``normalized=False``,
    when a0 = q a1).  ISOTROPIC_3D: A*_k ... A*_{k-n+1} psi_{k-n}^0, n <= k.
    The chain is evaluated on an extended lattice and restricted back, so no
    Q^-1 boundary convention enters.
    """
    if n == 0:
        return osc_ground(case, lattice, k)
    p = case.params()
    lam = osc_spectrum(case, k, n)
    if case.variant is Variant.HARMONIC:
        outer, inner, start = n + max(k - n, 0), max(n - k, 0), 0
    else:
        if n > k:
            raise ValueError(f"the 3D ladder needs n <= k, got n={n}, k={k}")
        outer, inner, start = n, 0, k - n
    ext = lattice.extended(outer=outer, inner=inner)
    ground = osc_ground(case, ext, start, normalize=False).psi
    psi = ground
    for j in range(start + 1, start + n + 1):
        psi = create(build_level(p, ext, j), psi, boundary="nan")
    normalized = False
    if case.variant is Variant.HARMONIC:
        psi = shift_pow(psi, n - k)
        g = ground.restrict(lattice, outer)
        norm0 = np.sqrt(np.sum((1 - lattice.q) * lattice.x * g.values**2))
        psi = psi / norm0
        if np.isclose(case.a0, case.q * case.a1, rtol=1e-14, atol=0.0):
            pass
        else:
            psi = harmonic_normalization(case, k, n) * psi
            normalized = True
    return EigenPair(psi.restrict(lattice, outer), lam, n, k, p, normalized)


def isotropic_product_state(case: OscillatorCase, lattice: QLattice, k: int, n: int) -> LatticeFn:
    """3D ladder state from the explicit product of first-order factors
    (-Q^-1 + q^-i (1-q) sqrt(h) sqrt(1 + c q^(-2i) x^2)) / ((1-q) x), i = k-n+1..k."""
    if case.variant is not Variant.ISOTROPIC_3D:
        raise ValueError("explicit product form is for the 3D case")
    if n > k:
        raise ValueError(f"the 3D ladder needs n <= k, got n={n}, k={k}")
    q = case.q
    c = q**4 * (case.a0 / q**2 - case.a1) / ((1 - q**2) * case.h)
    ext = lattice.extended(outer=n)
    x = ext.x
    psi = LatticeFn(ext, ground_values(case, x, k - n))
    for i in range(k - n + 1, k + 1):
        mult = q ** (-i) * (1 - q) * np.sqrt(case.h) * np.sqrt(1 + c * q ** (-2 * i) * x**2)
        psi = (psi * mult - shift_Qinv(psi, boundary="nan")) / ((1 - q) * x)
    return psi.restrict(lattice, n)
