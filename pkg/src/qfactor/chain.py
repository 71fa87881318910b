"""Parameterized chain data: B_k, A_k, f_k, eta_k, phi_k, alpha_k, rho_k, a_k.

Everything is restricted to the solvable subcase g_k = d_{k+1} q^gamma, in
which the whole chain is fixed by (gamma, b0, b1, b2, h, a0, a1, {d_k}, A0).
Level-k functions are closed forms in x, so evaluating them at q^{-k} x never
needs lattice data.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import cached_property, lru_cache

import numpy as np

from .qcore import DomainError, LatticeFn, QLattice, as_real, infinite_product, q_bracket


class ParameterError(ValueError):
    """Inconsistent or unsupported chain parameters."""


class SqrtDomainError(DomainError):
    pass


@dataclass(frozen=True)
class ChainParams:
    """Free data of the chain.

    ``A0(x) = x**A0_shift * sum(c_i x**i)`` over ``A0_coeffs``.  The factors
    d_k are ``d_list[k-1]`` when a list is given, otherwise ``q**d_power``.
    """

    q: float
    gamma: float
    b0: float = 0.0
    b1: float = 0.0
    b2: float = 0.0
    h: float = 0.0
    a0: float = 0.0
    a1: float = 0.0
    d_power: float = -1.0
    d_list: tuple[float, ...] = ()
    A0_shift: float = 1.0
    A0_coeffs: tuple[float, ...] = ()
    max_k: int = 6
    extended_precision: bool = False  # carry scalars as np.longdouble

    def __post_init__(self):
        if not 0.0 < self.q < 1.0:
            raise ParameterError(f"q must lie in (0, 1), got {self.q}")
        for k in range(1, self.max_k + 2):
            if self.d(k) <= 0:
                raise ParameterError(f"d_{k} must be positive")
        if self.gamma == 0 and not np.isclose(self.d(1) * self.a0, self.a1, rtol=1e-12, atol=1e-14):
            raise ParameterError(
                "gamma = 0 requires d_1 a_0 = a_1 (constant alpha_0 case); "
                f"got d_1 a_0 = {self.d(1) * self.a0}, a_1 = {self.a1}"
            )

    @classmethod
    def with_h_tilde(cls, h_tilde: float, **kw) -> "ChainParams":
        """Parameterize h through h = b1 q**h_tilde / (1-q)**2."""
        q, b1 = kw["q"], kw.get("b1", 0.0)
        return cls(h=b1 * q**h_tilde / (1 - q) ** 2, **kw)

    def updated(self, **changes) -> "ChainParams":
        return replace(self, **changes)

    # -- constants ---------------------------------------------------------

    @property
    def _q(self):
        return np.longdouble(self.q) if self.extended_precision else self.q

    def _real(self, v):
        return np.longdouble(v) if self.extended_precision else float(v)


    def d(self, k: int) -> float:
        if k < 1:
            raise ValueError("d_k is defined for k >= 1")
        if self.d_list:
            if k > len(self.d_list):
                raise ParameterError(f"d_{k} requested but only {len(self.d_list)} given")
            return self._real(self.d_list[k - 1])
        return self._real(self._q**self.d_power)

    def D(self, k: int) -> float:
        """d_k d_{k-1} ... d_1 (empty product 1)."""
        return self._real(np.prod([self.d(j) for j in range(1, k + 1)]))

    def _bracket_ratio(self, m: float) -> float:
        if self.gamma == 0:
            return self._real(m)
        return self._real(q_bracket(self.gamma * m, self._q) / q_bracket(self.gamma, self._q))

    def a(self, k: int) -> float:
        if k == 0:
            return self._real(self.a0)
        if k == 1:
            return self._real(self.a1)
        q, g = self._q, self.gamma
        inner = (
            -self.a0 * self._bracket_ratio(k - 1)
            + self.a1 / self.d(1) * self._bracket_ratio(k)
            - q * self.b2 * q_bracket(g * (k - 1), q) * q_bracket(g * k, q)
        )
        return self._real(self.D(k) * q ** (-g * (k - 1)) * inner)

    @property
    def pearson_shift(self) -> float:
        """Coefficient (d1 a0 - a1)/d1 scaled as it enters alpha_0 and the lemma."""
        return (self.d(1) * self.a0 - self.a1) / self.d(1)

    # -- level-0 closed forms ------------------------------------------------

    def B0(self, x):
        x = as_real(x)
        g = self.gamma
        return self.b2 * x**2 + self.b1 * x ** (2 - g) + self.b0 * x ** (2 - 2 * g)

    def A0(self, x):
        x = as_real(x)
        poly = np.zeros_like(x)
        for i, c in enumerate(self.A0_coeffs):
            poly = poly + c * x**i
        return x**self.A0_shift * poly

    @cached_property
    def _eta0_terms(self) -> list[tuple[float, float]]:
        """eta0 = B0 - (1-q) x A0 as [(exponent, coefficient)] with equal powers merged,
        so the leading coefficient is formed once and not by cancellation at tiny x."""
        g, q = self.gamma, self._q
        terms: dict[float, float] = {}
        for c, e in ((self.b2, 2.0), (self.b1, 2.0 - g), (self.b0, 2.0 - 2 * g)):
            terms[e] = terms.get(e, 0.0) + c
        for i, c in enumerate(self.A0_coeffs):
            e = 1.0 + self.A0_shift + i
            key = next((k for k in terms if abs(k - e) < 1e-12), e)
            terms[key] = terms.get(key, 0.0) - (1 - q) * c
        return sorted((e, c) for e, c in terms.items() if c != 0)

    def eta0(self, x):
        x = as_real(x)
        out = np.zeros_like(x)
        for e, c in self._eta0_terms:
            out = out + c * x**e
        return out

    def alpha0(self, x):
        x = as_real(x)
        q, g = self._q, self.gamma
        if g == 0:
            return np.full_like(x, self.h)
        const = q ** (g + 1) * self.b2 / (1 - q) ** 2 + q**g * self.pearson_shift / (1 - q**g)
        return const + self.h * x ** (-g) + q ** (1 - g) * self.b0 * x ** (-2 * g) / (1 - q) ** 2

    def phi0(self, x):
        x = as_real(x)
        rad = self.alpha0(x) / self.eta0(x)
        bad = ~(rad >= 0)
        if np.any(bad):
            raise SqrtDomainError(
                f"negative radicand alpha0/eta0 at x = {np.atleast_1d(x)[np.atleast_1d(bad)][0]!r}"
            )
        return np.sqrt(rad)

    # -- level-k closed forms ------------------------------------------------

    def B(self, k: int, x):
        return self._q ** (self.gamma * k) * self.D(k) * self.B0(x)

    def eta(self, k: int, x):
        x = as_real(x)
        return self._q ** (self.gamma * k) * self.D(k) * self.eta0(self._q ** (-k) * x)

    def phi(self, k: int, x):
        x = as_real(x)
        return self._q ** (-self.gamma * k) * self.phi0(self._q ** (-k) * x)

    def alpha(self, k: int, x):
        x = as_real(x)
        return self._q ** (-self.gamma * k) * self.D(k) * self.alpha0(self._q ** (-k) * x)

    def f(self, k: int, x):
        x = as_real(x)
        return self.phi(k, x) - 1.0 / ((1 - self._q) * x)

    def A(self, k: int, x):
        x = as_real(x)
        return (self.B(k, x) - self.eta(k, x)) / ((1 - self._q) * x)

    # -- weights -------------------------------------------------------------

    @cached_property
    def _rho0_regularizer(self) -> float:
        """Limit L of B0/eta0 at x -> 0 (1 when x A0 / B0 -> 0)."""
        g = self.gamma
        bterms: dict[float, float] = {}
        for c, e in ((self.b2, 2.0), (self.b1, 2.0 - g), (self.b0, 2.0 - 2 * g)):
            bterms[e] = bterms.get(e, 0.0) + c
        bterms = {e: c for e, c in bterms.items() if c != 0}
        if not bterms:
            raise ParameterError("B0 vanishes identically")
        eb = min(bterms)
        cb = bterms[eb]
        if not self._eta0_terms:
            raise ParameterError("eta0 vanishes identically")
        ee, ce = self._eta0_terms[0]
        if ee < eb - 1e-12:
            raise ParameterError("x A0(x) / B0(x) is unbounded at 0; weight product diverges")
        if ee > eb + 1e-12:
            raise ParameterError("eta0 vanishes faster than B0 at 0; weight product diverges")
        L = cb / ce
        if L <= 0:
            raise ParameterError("weight product has a non-positive limiting factor")
        return L

    def _log_rho0(self, x):
        """(sign, log |rho0|) at x; see ``rho0``."""
        x = as_real(x)
        q, L = self._q, self._rho0_regularizer
        s = -np.log(L) / np.log(q)

        def factor(n):
            y = q ** (n + 1) * x
            return self.B0(y) / (L * self.eta0(y))

        prod = infinite_product(factor).value
        eta = self.eta0(x)
        if np.any(eta == 0):
            raise DomainError("eta0 vanishes on the requested points")
        with np.errstate(divide="ignore"):
            return np.sign(eta * prod), s * np.log(x) - np.log(np.abs(eta)) + np.log(np.abs(prod)) - np.log(L)

    def rho0(self, x):
        """Weight at level 0 as a regularized infinite product.

        rho0(x) = x**s / (L eta0(x)) * prod_{n>=1} B0(q^n x) / (L eta0(q^n x)),
        with q**(-s) = L; for L = 1 this is the plain product of Q^n(B0/eta0)
        divided by B0, written so that a zero of B0 at x itself cancels.
        """
        sign, log = self._log_rho0(x)
        return sign * np.exp(log)

    def rho(self, k: int, x):
        """rho_k = rho_0 / (eta_1 ... eta_k), combined in log space because
        rho_0 alone underflows long before rho_k does."""
        x = as_real(x)
        sign, log = self._log_rho0(x)
        for j in range(1, k + 1):
            eta = self.eta(j, x)
            sign = sign * np.sign(eta)
            log = log - np.log(np.abs(eta))
        return sign * np.exp(log)

    def rho_transformed(self, k: int, x):
        """rho_k from rho_0(q^-k x) over the product of shifted B0 factors."""
        x = as_real(x)
        q, g = self._q, self.gamma
        scale = q ** (-g * k * (k + 1) / 2) / np.prod([self.D(j) for j in range(1, k + 1)])
        denom = np.ones_like(x)
        for n in range(k):
            denom = denom * self.B0(q ** (-n) * x)
        return scale * self.rho0(q ** (-k) * x) / denom


@dataclass(frozen=True)
class ChainLevel:
    k: int
    ak: float
    params: ChainParams = field(repr=False)
    lattice: QLattice = field(repr=False)
    Bk: LatticeFn = field(repr=False)
    Ak: LatticeFn = field(repr=False)
    fk: LatticeFn = field(repr=False)
    etak: LatticeFn = field(repr=False)
    phik: LatticeFn = field(repr=False)
    alphak: LatticeFn = field(repr=False)
    rhok: LatticeFn = field(repr=False)


def b0_poly(params: ChainParams, lattice: QLattice) -> LatticeFn:
    return lattice.fn(params.B0)


def alpha0(params: ChainParams, lattice: QLattice) -> LatticeFn:
    return lattice.fn(params.alpha0)


def a_k_sequence(params: ChainParams, k: int) -> float:
    return params.a(k)


def rho0_product(params: ChainParams, lattice: QLattice) -> LatticeFn:
    values = lattice.fn(params.rho0)
    # deep points may underflow to 0 when rho0 ~ x**s with s > 0
    if np.any(~(values.values >= 0)) or not np.any(values.values > 0):
        raise DomainError("rho0 is not positive on the lattice")
    return values


def build_level(params: ChainParams, lattice: QLattice, k: int) -> ChainLevel:
    """Sample every level-k function on the lattice.  Results are cached per
    (params, lattice, k) and their arrays are read-only."""
    if abs(lattice.q - params.q) > 1e-15:
        raise ParameterError("lattice q differs from chain q")
    if k < 0 or k > params.max_k + 1:
        raise ParameterError(f"level {k} outside 0..{params.max_k + 1}")
    if lattice.extended_precision != params.extended_precision:
        params = params.updated(extended_precision=lattice.extended_precision)
    return _build_level(params, lattice, k)


@lru_cache(maxsize=128)
def _build_level(params: ChainParams, lattice: QLattice, k: int) -> ChainLevel:
    x = lattice.x

    def ev(fn):
        v = np.array(as_real(fn(k, x)))
        v.setflags(write=False)
        return LatticeFn(lattice, v)

    return ChainLevel(
        k=k,
        ak=params.a(k),
        params=params,
        lattice=lattice,
        Bk=ev(params.B),
        Ak=ev(params.A),
        fk=ev(params.f),
        etak=ev(params.eta),
        phik=ev(params.phi),
        alphak=ev(params.alpha),
        rhok=ev(params.rho),
    )


# -- parameter families --------------------------------------------------------


def qhahn_params(q: float, b2: float = -1.0, b1: float = 1.0, b0: float = 0.0,
                 a1: float = 0.1, h: float | None = None, h_tilde: float | None = None,
                 a0: float | None = None, max_k: int = 8) -> ChainParams:
    """gamma = 1, d_k = 1/q and A0 chosen so that every f_k vanishes.

    The defaults give B0 = x(1-x) on [0, 1]_q with h = b1 q**h_tilde / (1-q)**2
    and h_tilde = max_k + 1/2, so B_k rho_k vanishes at both ends for every
    level up to max_k.  The default a0 makes eta0(x) = x((1-q)^2 h + x) > 0.
    """
    if h is None:
        h_tilde = max_k + 0.5 if h_tilde is None else h_tilde
        h = b1 * q**h_tilde / (1 - q) ** 2
    if a0 is None:
        a0 = (q_bracket(2, q) * b2 + 2 / (1 - q) + q**2 * a1) / q
    slope = q_bracket(2, q) * b2 - q * a0 + q**2 * a1
    intercept = b1 / (1 - q) - (1 - q) * h
    return ChainParams(q=q, gamma=1.0, b0=b0, b1=b1, b2=b2, h=h, a0=a0, a1=a1,
                       d_power=-1.0, A0_shift=0.0, A0_coeffs=(intercept, slope),
                       max_k=max_k)


def harmonic_params(q: float, a0: float = 1.0, a1: float = 0.5, h: float = 0.3,
                    max_k: int = 8) -> ChainParams:
    """Constant-weight case gamma = 1, B0 = 1, A0 = 0, d_k = 1/q."""
    return ChainParams(q=q, gamma=1.0, b0=1.0, h=h, a0=a0, a1=a1, d_power=-1.0,
                       A0_shift=-1.0, max_k=max_k)


def isotropic_params(q: float, a0: float = 1.0, a1: float = 0.5, h: float = 0.5,
                     max_k: int = 8) -> ChainParams:
    """Constant-weight case gamma = 2, B0 = 1, A0 = 0, d_k = q**-2."""
    return ChainParams(q=q, gamma=2.0, b1=1.0, h=h, a0=a0, a1=a1, d_power=-2.0,
                       A0_shift=-1.0, max_k=max_k)


def consistency_residuals(params: ChainParams, x, k: int) -> dict[str, float]:
    """Max relative residuals of the level recursions at points ``x``.

    ``eta``/``phi``: eta_{k+1}(x) = g eta_k(x/q), phi_{k+1}(x) = (d_{k+1}/g) phi_k(x/q)
    with g = d_{k+1} q**gamma; ``alpha``: the third consistency relation between
    alpha_k(x), alpha_k(qx), B_k and the a-constants; ``f``: f_k against its
    level-0 shift form.
    """
    p, q = params, params._q
    x = as_real(x)
    d = p.d(k + 1)
    g = d * q**p.gamma

    def rel(lhs, rhs):
        return float(np.max(np.abs(lhs - rhs) / np.maximum(np.abs(lhs), np.abs(rhs)).clip(min=1e-300)))

    out = {
        "eta": rel(p.eta(k + 1, x), g * p.eta(k, x / q)),
        "phi": rel(p.phi(k + 1, x), d / g * p.phi(k, x / q)),
    }
    lhs = p.alpha(k, x) - g / d * p.alpha(k, q * x)
    rhs = ((q**2 * d * p.B(k, q * x) - g * p.B(k, q**2 * x)) / ((1 - q) ** 2 * q**3 * x**2)
           + d * p.a(k) - p.a(k + 1)) * g / d**2
    scale = np.abs(p.alpha(k, x)) + np.abs(g / d * p.alpha(k, q * x))
    out["alpha"] = float(np.max(np.abs(lhs - rhs) / scale))
    fk = p.q ** (-p.gamma * k) * p.f(0, q ** (-k) * x) - (1 - q ** (k * (1 - p.gamma))) / ((1 - q) * x)
    # f_k is a difference of O(1/((1-q)x)) terms, so measure against that scale
    out["f"] = float(np.max(np.abs(p.f(k, x) - fk) * (1 - q) * x))
    return out
