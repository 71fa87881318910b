"""The f_k = 0 chain (gamma = 1, d_k = 1/q): exact polynomial ladders.

Here B_k = B_0 = b2 x^2 + b1 x + b0 and A_k(x) = a~_k x + b~_k, so creation
operators map polynomials to polynomials and every ladder state is exact.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial import Polynomial as QPoly

from .chain import ChainParams, ParameterError, build_level
from .qcore import DomainError, LatticeFn, QLattice, q_bracket

MAX_DEGREE = 16


@dataclass(frozen=True)
class QHahnLevel:
    k: int
    q: float
    a_tilde: float
    b_tilde: float
    b2: float
    b1: float
    b0: float

    def A(self) -> QPoly:
        return QPoly([self.b_tilde, self.a_tilde])

    def B(self) -> QPoly:
        return QPoly([self.b0, self.b1, self.b2])


def _check_family(params: ChainParams) -> None:
    q = params.q
    if params.gamma != 1.0 or not np.isclose(params.d(1), 1 / q, rtol=1e-14):
        raise ParameterError("the polynomial ladder needs gamma = 1 and d_k = 1/q")


def hahn_level(params: ChainParams, k: int) -> QHahnLevel:
    _check_family(params)
    p, q = params, params.q
    a_t = -q ** (-2 * (k - 1)) * (q_bracket(2 * (k - 1), q) * p.b2 + p.a0 / q - p.a1)
    b_t = p.b1 / (1 - q) - (1 - q) * q ** (-k) * p.h
    return QHahnLevel(k, q, float(a_t), float(b_t), p.b2, p.b1, p.b0)


def dq(p: QPoly, q: float) -> QPoly:
    """d_q x^m = [m] x^(m-1)."""
    c = p.coef
    if len(c) == 1:
        return QPoly([0.0])
    m = np.arange(1, len(c))
    return QPoly(q_bracket(m, q) * c[1:])


def qinv(p: QPoly, q: float) -> QPoly:
    """Q^-1 x^m = q^(-m) x^m."""
    return QPoly(p.coef * q ** (-np.arange(len(p.coef), dtype=float)))


def hahn_create(level: QHahnLevel, p: QPoly) -> QPoly:
    """A_k^* p = -B_0 d_q Q^-1 p - (a~_k x + b~_k) p."""
    q = level.q
    out = -(level.B() * dq(qinv(p, q), q)) - level.A() * p
    if out.degree() > MAX_DEGREE:
        raise DomainError(f"degree {out.degree()} exceeds the cap {MAX_DEGREE}")
    return out


def hahn_operator(level: QHahnLevel, p: QPoly) -> QPoly:
    """(B_0 d_q Q^-1 d_q + A_k d_q) p, the q-Hahn operator."""
    q = level.q
    d1 = dq(p, q)
    return level.B() * dq(qinv(d1, q), q) + level.A() * d1


def hahn_eigen(level: QHahnLevel, n: int) -> float:
    """a~_k [n] + b2 [n][n-1] q^-(n-1)."""
    q = level.q
    return float(level.a_tilde * q_bracket(n, q) + level.b2 * q_bracket(n, q) * q_bracket(n - 1, q) * q ** (-(n - 1)))


def hahn_family(params: ChainParams, k: int, n_max: int) -> list[tuple[QPoly, float]]:
    """[(psi_k^n, lambda_k^n)] for n = 0..n_max with psi_k^n = A_k^* ... A_{k-n+1}^* 1."""
    if n_max > k:
        raise ValueError(f"n_max={n_max} exceeds level k={k}")
    top = hahn_level(params, k)
    out = []
    for n in range(n_max + 1):
        p = QPoly([1.0])
        for j in range(k - n + 1, k + 1):
            p = hahn_create(hahn_level(params, j), p)
        out.append((p, hahn_eigen(top, n)))
    return out


def hahn_equation_residual(params: ChainParams, k: int, p: QPoly, lam: float) -> float:
    """Coefficient-wise residual of the q-Hahn equation, relative to max |coeff| of lam p."""
    r = hahn_operator(hahn_level(params, k), p) - lam * p
    scale = max(np.max(np.abs((lam * p).coef)), np.max(np.abs(hahn_operator(hahn_level(params, k), p).coef)))
    err = float(np.max(np.abs(r.coef)))
    return err / scale if scale > 0 else err


def hahn_orthogonality(params: ChainParams, lattice: QLattice, k: int, n_max: int) -> tuple[np.ndarray, float]:
    """Gram matrix of psi_k^0..psi_k^n_max under the rho_k Jackson product, and
    the largest |G_ij| / sqrt(G_ii G_jj) over i != j."""
    rho = build_level(params, lattice, k).rhok.values
    # deep points may underflow to 0 when rho_k ~ x**s with s > 0
    if np.any(~(rho >= 0)) or not np.any(rho > 0):
        raise DomainError("rho_k is not positive on the lattice")
    w = (1 - lattice.q) * lattice.x * rho * lattice.signs[:, None]
    V = np.array([p(lattice.x).ravel() for p, _ in hahn_family(params, k, n_max)])
    G = (V * w.ravel()) @ V.T
    d = np.sqrt(np.diag(G))
    off = np.abs(G / np.outer(d, d)) - np.eye(len(d))
    return G, float(np.max(off))


def three_term_residual(params: ChainParams, k: int, n: int) -> float:
    """Least-squares residual of x psi^n in span{psi^(n-1), psi^n, psi^(n+1)}, relative to |x psi^n|."""
    fam = [p for p, _ in hahn_family(params, k, n + 1)]
    target = (QPoly([0.0, 1.0]) * fam[n]).coef
    size = len(target)
    basis = np.array([np.pad(fam[j].coef, (0, size - len(fam[j].coef))) for j in (n - 1, n, n + 1)]).T
    coef, *_ = np.linalg.lstsq(basis, target, rcond=None)
    return float(np.linalg.norm(basis @ coef - target) / np.linalg.norm(target))


def poly_on_lattice(p: QPoly, lattice: QLattice) -> LatticeFn:
    return LatticeFn(lattice, p(lattice.x))
