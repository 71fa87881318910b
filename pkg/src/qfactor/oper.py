"""Annihilation, creation and second-order operators acting on lattice functions."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .chain import ChainLevel, ChainParams, build_level
from .qcore import (
    LatticeFn,
    as_real,
    interior_mask,
    jackson_integral,
    q_bracket,
    q_derivative,
    q_derivative_outward,
    shift_Q,
    shift_Qinv,
)


@dataclass(frozen=True)
class QDiffOp:
    """Z d_q Q^-1 d_q + W d_q + V."""

    k: int
    Z: LatticeFn
    W: LatticeFn
    V: LatticeFn

    def stencil(self):
        """Coefficients (c_out, c_mid, c_in) of psi(x/q), psi(x), psi(qx)."""
        lat = self.Z.lattice
        x, q = lat.x, lat.q
        s = (1 - q) * x
        c_out = self.Z.values * q / s**2
        c_in = self.Z.values / s**2 - self.W.values / s
        c_mid = self.V.values - c_out - c_in
        return c_out, c_mid, c_in


def annihilate(level: ChainLevel, psi: LatticeFn) -> LatticeFn:
    """A_k psi = d_q psi + f_k psi (maps level k to level k-1)."""
    return q_derivative(psi) + level.fk * psi


def annihilate_shift_form(level: ChainLevel, psi: LatticeFn) -> LatticeFn:
    """A_k psi = -Q psi / ((1-q) x) + phi_k psi."""
    lat = psi.lattice
    return -shift_Q(psi) / ((1 - lat.q) * lat.x) + level.phik * psi


def create(level: ChainLevel, psi: LatticeFn, boundary: str = "zero") -> LatticeFn:
    """A_k^* psi = B_k(-d_q Q^-1 psi + f_k psi) - A_k (1 + (1-q) x f_k) psi."""
    lat = psi.lattice
    x, q = lat.x, lat.q
    B, A, f = level.Bk, level.Ak, level.fk
    return B * (-q_derivative_outward(psi, boundary) + f * psi) - A * (1 + (1 - q) * x * f.values) * psi


def create_shift_form(level: ChainLevel, psi: LatticeFn, boundary: str = "zero") -> LatticeFn:
    """A_k^* psi = -B_k Q^-1 psi / ((1-q) x) + eta_k phi_k psi."""
    lat = psi.lattice
    return -level.Bk * shift_Qinv(psi, boundary) / ((1 - lat.q) * lat.x) + level.etak * level.phik * psi


def hamiltonian(level: ChainLevel) -> QDiffOp:
    """H_k from its coefficient functions Z_k, W_k, V_k.

    Shifted arguments (Q^-1 applied to coefficient functions) are evaluated
    from the closed forms, not from the lattice.
    """
    p, lat, k = level.params, level.lattice, level.k
    x, q = lat.x, lat.q
    B, A, f = p.B(k, x), p.A(k, x), p.f(k, x)
    f_out = p.f(k, x / q)
    Z = -B * (1 + (1 - q) * (x / q) * f_out)
    W = B * f - A * (1 + (1 - q) * x * f) - B * f_out / q
    V = -B * (f_out - f) / ((1 - q) * x) - A * f * (1 + (1 - q) * x * f) + B * f**2 + level.ak
    wrap = lambda v: LatticeFn(lat, as_real(v))  # noqa: E731
    return QDiffOp(k, wrap(Z), wrap(W), wrap(V))


def display_hamiltonian(params: ChainParams, lattice, k: int, verbatim: bool = False) -> QDiffOp:
    """H_k written through alpha_0, eta_0 and B_0 at shifted arguments.

    With ``verbatim=True`` the q-term of the potential carries no q**(gamma k)
    factor; that variant only agrees with the factorized operator at k = 0.
    """
    p, q, g = params, lattice.q, params.gamma
    x = lattice.x
    Dk = p.D(k)
    Bx2 = p.B0(x) / x**2
    phi_next = p.phi0(q ** (-(k + 1)) * x)
    u = q ** (-k) * x
    root = np.sqrt(p.alpha0(u) * p.eta0(u)) * np.sign(p.eta0(u))
    Z = -(1 - q) / q * x**3 * Bx2 * phi_next
    W = -x**2 / q * Bx2 * phi_next + root
    qterm = q if verbatim else q ** (1 + g * k)
    if g == 0:
        ratio = lambda m: float(m)  # noqa: E731
    else:
        ratio = lambda m: q_bracket(g * m, q) / q_bracket(g, q)  # noqa: E731
    const = -q ** (-g * (k - 1)) * (
        p.a0 * ratio(k - 1) - p.a1 / p.d(1) * ratio(k) + q * p.b2 * q_bracket(g * (k - 1), q) * q_bracket(g * k, q)
    )
    V = (
        Bx2 / (1 - q) ** 2 * (qterm - (1 - q) * x * phi_next)
        + q ** (-g * k) * p.alpha0(u)
        - root / ((1 - q) * x)
        + const
    )
    wrap = lambda v: LatticeFn(lattice, Dk * as_real(v))  # noqa: E731
    return QDiffOp(k, wrap(Z), wrap(W), wrap(V))


def apply_H(op: QDiffOp, psi: LatticeFn, boundary: str = "zero") -> LatticeFn:
    dpsi = q_derivative(psi)
    return op.Z * q_derivative_outward(dpsi, boundary) + op.W * dpsi + op.V * psi


def factorized_H(level: ChainLevel, psi: LatticeFn, boundary: str = "zero") -> LatticeFn:
    """(A_k^* A_k + a_k) psi."""
    return create(level, annihilate(level, psi), boundary) + level.ak * psi


def intertwined_H(level_next: ChainLevel, psi: LatticeFn, boundary: str = "zero") -> LatticeFn:
    """d_{k+1}^-1 (A_{k+1} A_{k+1}^* + a_{k+1}) psi."""
    d = level_next.params.d(level_next.k)
    return (annihilate(level_next, create(level_next, psi, boundary)) + level_next.ak * psi) / d


def sup_residual(residual: LatticeFn, psi: LatticeFn) -> float:
    """max |residual| over interior points, relative to max |psi|."""
    mask = interior_mask(residual)
    scale = np.max(np.abs(psi.values[np.isfinite(psi.values)]))
    return float(np.max(np.abs(residual.values[mask])) / scale) if mask.any() else 0.0


def weighted_norm(psi: LatticeFn, rho: LatticeFn, mask=None) -> float:
    """sqrt of the Jackson sum of |psi|^2 |rho| over ``mask`` (default: finite points)."""
    lat = psi.lattice
    if mask is None:
        mask = np.isfinite(psi.values)
    w = (1 - lat.q) * lat.x * np.abs(rho.values)
    return float(np.sqrt(np.sum((w * psi.values**2)[mask])))


def adjoint_check(level: ChainLevel, phi: LatticeFn, psi: LatticeFn) -> tuple[float, float]:
    """<A_k phi, psi>_{k-1} and <phi, A_k^* psi>_k as truncated Jackson sums.

    The deepest point, where A_k phi is undefined, is dropped from both sides.
    """
    p, lat, k = level.params, level.lattice, level.k
    rho_prev = lat.fn(lambda x: p.rho(k - 1, x))
    left = annihilate(level, phi) * psi * rho_prev
    right = phi * create(level, psi) * level.rhok
    left_v, right_v = left.values.copy(), right.values.copy()
    left_v[:, -1] = right_v[:, -1] = 0.0
    return (
        jackson_integral(LatticeFn(lat, left_v)).value,
        jackson_integral(LatticeFn(lat, right_v)).value,
    )


@dataclass(frozen=True)
class FactorizationReport:
    k: int
    identity: float
    intertwining: float
    commutator: float


def factorization_residuals(params: ChainParams, lattice, k: int, psi: LatticeFn,
                            shift_term: bool = False) -> FactorizationReport:
    """Sup-norm residuals of both factorizations and of the intertwining relation
    H_{k+1} A*_{k+1} = d_{k+1} A*_{k+1} H_k (``shift_term=True`` adds the
    extra (a_{k+1} - d_{k+1} a_k) A*_{k+1} term, which does not hold in general)."""
    lev = build_level(params, lattice, k)
    nxt = build_level(params, lattice, k + 1)
    Hpsi = apply_H(hamiltonian(lev), psi)
    ident = sup_residual(factorized_H(lev, psi) - Hpsi, psi)
    inter = sup_residual(intertwined_H(nxt, psi) - Hpsi, psi)
    d = params.d(k + 1)
    up = create(nxt, psi)
    lhs = apply_H(hamiltonian(nxt), up)
    rhs = d * create(nxt, Hpsi)
    if shift_term:
        rhs = rhs + (nxt.ak - d * lev.ak) * up
    # A*_{k+1} pulls in psi(x/q): the endpoint value and its inner neighbour use the Q^-1 convention
    comm = lhs - rhs
    v = comm.values.copy()
    v[:, :2] = np.nan
    scale = np.max(np.abs(lhs.values[np.isfinite(lhs.values)])) + np.max(np.abs(rhs.values[np.isfinite(rhs.values)]))
    finite = np.isfinite(v)
    comm_res = float(np.max(np.abs(v[finite])) / scale) if finite.any() else 0.0
    return FactorizationReport(k, ident, inter, comm_res)


def pearson_residual(level: ChainLevel) -> float:
    """max over interior points of |d_q(B_k rho_k) - A_k rho_k|, relative to the
    size of the difference-quotient terms."""
    lat = level.lattice
    Brho = level.Bk * level.rhok
    lhs = q_derivative(Brho)
    rhs = level.Ak * level.rhok
    scale = (np.abs(Brho.values) + np.abs(shift_Q(Brho).values)) / ((1 - lat.q) * lat.x)
    with np.errstate(divide="ignore", invalid="ignore"):
        r = np.abs(lhs.values - rhs.values) / scale
    # skip points where B_k rho_k is within eps of underflow
    normal = np.finfo(float).tiny / np.finfo(float).eps
    ok = np.isfinite(r) & (np.abs(Brho.values) > normal) & (np.abs(shift_Q(Brho).values) > normal)
    return float(np.max(r[ok])) if ok.any() else 0.0
