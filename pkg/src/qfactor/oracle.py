"""Brute-force check: H_k as a tridiagonal matrix on the truncated lattice.

Row n couples x_n to x_n / q (outer) and q x_n (inner).  At x = b the outer
value is dropped, (Q^-1 psi)(b) = 0; at the deepest point the inner value is
dropped (truncation).  Branches never couple, so each is its own block.

The blocks are graded: entries grow like x**-2 toward 0.  They are
symmetrized through the geometric mean of the off-diagonal pair (in log
space) and solved by bisection, which keeps small eigenvalues accurate.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .chain import ChainLevel, ChainParams, build_level
from .oper import apply_H, hamiltonian
from .qcore import LatticeFn, QLattice

SYMMETRY_TOL = 1e-9


class SymmetrizationWarning(UserWarning):
    """The matrix is not weight-symmetric; only residual checks are possible."""


@dataclass(frozen=True)
class LatticeMatrix:
    lattice: QLattice
    k: int
    main: np.ndarray  # (branch, n)
    inner: np.ndarray  # coefficient of psi(q x_n), last column 0
    outer: np.ndarray  # coefficient of psi(x_n / q), first column 0
    weight: np.ndarray = field(repr=False)  # (1-q) x rho_k

    @property
    def dimension(self) -> int:
        return int(self.main.size)

    def matvec(self, psi: LatticeFn) -> LatticeFn:
        v = psi.values
        out = self.main * v
        out[:, :-1] += self.inner[:, :-1] * v[:, 1:]
        out[:, 1:] += self.outer[:, 1:] * v[:, :-1]
        return LatticeFn(psi.lattice, out)

    def dense(self, branch: int = 0) -> np.ndarray:
        return (np.diag(self.main[branch]) + np.diag(self.inner[branch, :-1], 1)
                + np.diag(self.outer[branch, 1:], -1))


def assemble(level: ChainLevel, next_level: ChainLevel | None = None) -> LatticeMatrix:
    """Sample the stencil of H_k.  ``next_level`` is accepted for symmetry with
    the factorized form and is not needed: the coefficients come from level k."""
    del next_level
    lat = level.lattice
    c_out, c_mid, c_in = (np.array(c, dtype=float) for c in hamiltonian(level).stencil())
    c_out[:, 0] = 0.0
    c_in[:, -1] = 0.0
    w = np.array((1 - lat.q) * lat.x * np.abs(level.rhok.values), dtype=float)
    return LatticeMatrix(lat, level.k, c_mid, c_in, c_out, w)


def faithfulness(matrix: LatticeMatrix, level: ChainLevel, psi: LatticeFn) -> float:
    """max |M psi - H_k psi| / max |M psi| over rows that need no boundary convention."""
    a = matrix.matvec(psi).values[:, 1:-1]
    b = apply_H(hamiltonian(level), psi).values[:, 1:-1]
    return float(np.max(np.abs(a - b)) / np.max(np.abs(a)))


def symmetry_defect(matrix: LatticeMatrix) -> float:
    """max_n |w_n M_{n,n+1} - w_{n+1} M_{n+1,n}| relative to the pair, over
    pairs whose weights have not underflowed."""
    w = matrix.weight
    lhs = w[:, :-1] * matrix.inner[:, :-1]
    rhs = w[:, 1:] * matrix.outer[:, 1:]
    scale = np.abs(lhs) + np.abs(rhs)
    normal = np.finfo(float).tiny / np.finfo(float).eps
    ok = (scale > 0) & (w[:, :-1] > normal) & (w[:, 1:] > normal)
    return float(np.max(np.abs(lhs - rhs)[ok] / scale[ok])) if ok.any() else 0.0


@dataclass(frozen=True)
class OracleEigen:
    value: float
    vector: LatticeFn  # back-transformed to the unsymmetrized basis, max |entry| = 1
    residual: float


def _branch_spectrum(main, inner, outer, m):
    up, lo = inner[:-1], outer[1:]
    prod = up * lo
    decoupled = (up == 0) & (lo == 0)
    if np.any((prod <= 0) & ~decoupled):
        return None
    with np.errstate(divide="ignore"):
        log_up = np.where(decoupled, 0.0, np.log(np.abs(up)))
        log_e = np.where(decoupled, 0.0, 0.5 * (log_up + np.log(np.abs(lo))))
    e = np.where(decoupled, 0.0, np.sign(up) * np.exp(log_e))
    m = min(m, len(main))
    vals, vecs = eigh_tridiagonal(main, e, select="i", select_range=(0, m - 1), tol=2 * np.finfo(float).tiny)
    # S = T M T^-1 with T_{n+1} / T_n = M_{n,n+1} / e_n, so psi = T^-1 v
    logT = np.concatenate([[0.0], np.cumsum(log_up - log_e)])
    out = []
    for j in range(len(vals)):
        v = vecs[:, j]
        r = main * v
        r[:-1] += e * v[1:]
        r[1:] += e * v[:-1]
        res = float(np.linalg.norm(r - vals[j] * v) / max(abs(vals[j]), 1.0))
        with np.errstate(over="ignore", under="ignore"):
            psi = v * np.exp(-(logT - logT[np.argmax(np.abs(v))]))
        psi = psi / psi[np.argmax(np.abs(psi))]
        out.append((float(vals[j]), psi, res))
    return out


def spectrum(matrix: LatticeMatrix, m: int) -> list[OracleEigen]:
    """The m lowest eigenvalues over all branches with their eigenvectors.

    Returns [] with a SymmetrizationWarning when an off-diagonal pair has
    mismatched signs; use ``residual_mode`` then.
    """
    lat = matrix.lattice
    found = []
    for br in range(matrix.main.shape[0]):
        res = _branch_spectrum(matrix.main[br], matrix.inner[br], matrix.outer[br], m)
        if res is None:
            warnings.warn("off-diagonal signs differ; matrix is not symmetrizable", SymmetrizationWarning)
            return []
        for val, vec, r in res:
            full = np.zeros(lat.shape)
            full[br] = vec
            found.append(OracleEigen(val, LatticeFn(lat, full), r))
    found.sort(key=lambda e: e.value)
    return found[:m]


def residual_mode(matrix: LatticeMatrix, psi: LatticeFn, lam: float) -> float:
    """||M psi - lam psi|| / ||psi|| in the Jackson weight, rows 1..N-2."""
    r = (matrix.matvec(psi) - lam * psi).values[:, 1:-1]
    w = matrix.weight[:, 1:-1]
    v = psi.values[:, 1:-1]
    m = np.isfinite(r) & np.isfinite(v)
    return float(np.sqrt(np.sum((w * r**2)[m]) / np.sum((w * v**2)[m])))


def match_eigenvalues(predicted: list[float], found: list[float]) -> list[int]:
    """Nearest-neighbour assignment; raises if two predictions share a target."""
    found = np.asarray(found)
    idx = [int(np.argmin(np.abs(found - lam))) for lam in predicted]
    if len(set(idx)) != len(idx):
        raise ValueError("two predicted eigenvalues map to one oracle eigenvalue")
    return idx


def weighted_cosine(u: np.ndarray, v: np.ndarray, w: np.ndarray, mask: np.ndarray) -> float:
    uu, vv, ww = u[mask], v[mask], w[mask]
    return float(abs(np.sum(ww * uu * vv)) / np.sqrt(np.sum(ww * uu**2) * np.sum(ww * vv**2)))


@dataclass(frozen=True)
class OracleMatch:
    n: int
    predicted: float
    found: float
    truncation: float  # |lambda(N) - lambda(2N)| for the matched eigenvalue
    tolerance: float
    cosine: float
    excluded_weight: float  # Jackson weight fraction of points outside the trust mask
    ok_value: bool
    ok_vector: bool


def compare_family(params: ChainParams, lattice: QLattice, k: int,
                   states: list[tuple[LatticeFn, float]], trust: list[np.ndarray] | None = None,
                   rel_tol: float = 1e-6, cos_tol: float = 1e-6) -> list[OracleMatch]:
    """Match predicted (psi_k^n, lambda_k^n) against the oracle at depth N and 2N.

    ``trust`` optionally gives, per state, a boolean mask of lattice points where
    the predicted values are accurate; the cosine uses only those points.
    """
    m = len(states) + 2
    mat = assemble(build_level(params, lattice, k))
    found = spectrum(mat, m)
    deep = QLattice(lattice.q, lattice.a, lattice.b, 2 * lattice.depth, lattice.extended_precision)
    found2 = spectrum(assemble(build_level(params, deep, k)), m)
    if not found or not found2:
        raise ValueError("oracle matrix is not symmetrizable; use residual_mode")
    vals = [e.value for e in found]
    vals2 = [e.value for e in found2]
    idx = match_eigenvalues([lam for _, lam in states], vals)
    out = []
    for n, ((psi, lam), j) in enumerate(zip(states, idx)):
        trunc = abs(vals[j] - vals2[j]) if j < len(vals2) else float("inf")
        tol = max(rel_tol * abs(lam), trunc)
        mask = np.isfinite(psi.values)
        if trust is not None:
            mask &= trust[n]
        w = mat.weight
        excluded = float(np.sum(w[~mask] * np.nan_to_num(found[j].vector.values[~mask]) ** 2)
                         / np.sum(w * found[j].vector.values ** 2))
        cos = weighted_cosine(psi.values, found[j].vector.values, w, mask)
        out.append(OracleMatch(n, float(lam), vals[j], float(trunc), float(tol), cos, excluded,
                               abs(vals[j] - lam) <= tol, cos > 1 - cos_tol))
    return out
