"""q-calculus primitives on the geometric lattice [a, b]_q.

A lattice function stores one value per point ``q**n * y`` for each nonzero
endpoint ``y`` in ``(b, a)``.  Values live in a 2-D array indexed by
``(branch, n)``; row 0 is the b-branch, row 1 (when ``a > 0``) the a-branch.
Points where an operation is undefined carry NaN.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

EPS_POCH = 1e-16
MAX_PRODUCT_TERMS = 100_000


def as_real(v) -> np.ndarray:
    """Float array, keeping np.longdouble input in extended precision."""
    v = np.asarray(v)
    return v if v.dtype == np.longdouble else v.astype(float)


class DomainError(ValueError):
    """Raised when an operation is evaluated outside its domain."""


@dataclass(frozen=True)
class QLattice:
    q: float
    a: float
    b: float
    depth: int
    extended_precision: bool = False  # evaluate on np.longdouble points

    def __post_init__(self):
        if not 0.0 < self.q < 1.0:
            raise ValueError(f"q must lie in (0, 1), got {self.q}")
        if self.a < 0.0 or not self.a < self.b:
            raise ValueError(f"need 0 <= a < b, got a={self.a}, b={self.b}")
        if self.depth < 1:
            raise ValueError("depth must be >= 1")

    @property
    def endpoints(self) -> tuple[float, ...]:
        return (self.b,) if self.a == 0.0 else (self.b, self.a)

    @property
    def signs(self) -> np.ndarray:
        """Jackson-integral sign per branch (+ for b, - for a)."""
        return np.array([1.0, -1.0][: len(self.endpoints)])

    @property
    def x(self) -> np.ndarray:
        n = np.arange(self.depth)
        dt = np.longdouble if self.extended_precision else float
        q = dt(self.q)
        return np.array([dt(y) * q**n for y in self.endpoints], dtype=dt)

    @property
    def shape(self) -> tuple[int, int]:
        return (len(self.endpoints), self.depth)

    def extended(self, outer: int = 0, inner: int = 0) -> "QLattice":
        """Same lattice with ``outer`` points added beyond each endpoint and
        ``inner`` extra points at the deep end."""
        scale = self.q ** (-outer)
        return QLattice(self.q, self.a * scale, self.b * scale, self.depth + outer + inner, self.extended_precision)

    def fn(self, f: Callable[[np.ndarray], np.ndarray]) -> "LatticeFn":
        return LatticeFn(self, as_real(f(self.x)) * np.ones(self.shape, dtype=self.x.dtype))

    def constant(self, c: float) -> "LatticeFn":
        return LatticeFn(self, np.full(self.shape, c, dtype=self.x.dtype))


@dataclass(frozen=True)
class LatticeFn:
    lattice: QLattice
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.values.shape != self.lattice.shape:
            raise ValueError(
                f"values shape {self.values.shape} does not match lattice {self.lattice.shape}"
            )

    def _wrap(self, values) -> "LatticeFn":
        return LatticeFn(self.lattice, as_real(values))

    def _other(self, other):
        if isinstance(other, LatticeFn):
            return other.values
        return other

    def __add__(self, other):
        return self._wrap(self.values + self._other(other))

    __radd__ = __add__

    def __sub__(self, other):
        return self._wrap(self.values - self._other(other))

    def __rsub__(self, other):
        return self._wrap(self._other(other) - self.values)

    def __mul__(self, other):
        return self._wrap(self.values * self._other(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self._wrap(self.values / self._other(other))

    def __neg__(self):
        return self._wrap(-self.values)

    def restrict(self, lattice: QLattice, offset: int) -> "LatticeFn":
        """Sub-lattice view starting ``offset`` points inward on each branch."""
        return LatticeFn(lattice, self.values[:, offset : offset + lattice.depth].copy())


def q_bracket(n, q: float):
    """q-number [n] = (1 - q**n) / (1 - q)."""
    return (1.0 - np.power(q, n)) / (1.0 - q)


def q_factorial(n: int, q: float) -> float:
    return float(np.prod([q_bracket(j, q) for j in range(1, n + 1)]))


def shift_pow(f: LatticeFn, m: int) -> LatticeFn:
    """(Q**m f)(x) = f(q**m x) by exponent reindexing; missing points are NaN."""
    out = np.full_like(f.values, np.nan)
    N = f.lattice.depth
    if abs(m) >= N:
        return f._wrap(out)
    if m >= 0:
        out[:, : N - m] = f.values[:, m:]
    else:
        out[:, -m:] = f.values[:, : N + m]
    return f._wrap(out)


def shift_Q(f: LatticeFn) -> LatticeFn:
    return shift_pow(f, 1)


def shift_Qinv(f: LatticeFn, boundary: str = "zero") -> LatticeFn:
    """(Q^-1 f)(x) = f(x/q); at x = a, b the value is 0 (``boundary="zero"``)
    or NaN (``boundary="nan"``)."""
    out = shift_pow(f, -1).values
    if boundary == "zero":
        out[:, 0] = 0.0
    elif boundary != "nan":
        raise ValueError(f"unknown boundary convention {boundary!r}")
    return f._wrap(out)


def q_derivative(f: LatticeFn) -> LatticeFn:
    """(f(x) - f(qx)) / ((1-q) x); undefined (NaN) at the deepest point."""
    lat = f.lattice
    return f._wrap((f.values - shift_Q(f).values) / ((1.0 - lat.q) * lat.x))


@dataclass(frozen=True)
class JacksonResult:
    value: float
    last_term: float


def jackson_integral(f: LatticeFn) -> JacksonResult:
    """Truncated Jackson integral over [a, b]_q."""
    if not np.all(np.isfinite(f.values)):
        raise DomainError("non-finite value in Jackson integrand")
    lat = f.lattice
    terms = (1.0 - lat.q) * lat.x * f.values * lat.signs[:, None]
    return JacksonResult(float(terms.sum()), float(np.max(np.abs(terms[:, -1]))))


@dataclass(frozen=True)
class ProductResult:
    value: np.ndarray
    terms: int
    stopped_by: str  # "tolerance" or "cap"


def infinite_product(factor: Callable[[int], np.ndarray], eps: float = EPS_POCH,
                     cap: int = MAX_PRODUCT_TERMS) -> ProductResult:
    """Multiply ``factor(0) * factor(1) * ...`` until every factor is within
    ``eps`` of 1 (or two ulps, if larger), or ``cap`` terms have been taken."""
    value = None
    for m in range(cap):
        fm = as_real(factor(m))
        value = fm.copy() if value is None else value * fm
        # a factor that rounds to 1 within two ulps counts as converged
        if np.all(np.abs(fm - 1.0) <= max(eps, 2 * np.finfo(fm.dtype).eps)):
            return ProductResult(value, m + 1, "tolerance")
    return ProductResult(value, cap, "cap")


def q_pochhammer(a, q: float, n=np.inf):
    """(a; q)_n = prod_{m<n} (1 - q**m a); ``n = inf`` gives the infinite product."""
    a = as_real(a)
    if np.isinf(n):
        return infinite_product(lambda m: 1.0 - q**m * a).value
    out = np.ones_like(a)
    for m in range(int(n)):
        out = out * (1.0 - q**m * a)
    return out


def quadratic_pochhammer(c1: float, c2: float, t, p: float):
    """prod_{n>=0} (1 + c1 p^n t + c2 p^{2n} t^2).

    Equals (t/x1; p)_inf (t/x2; p)_inf where x1, x2 are the roots of
    c2 z^2 + c1 z + 1, without forming (possibly complex) roots.
    """
    t = as_real(t)
    return infinite_product(lambda n: 1.0 + c1 * p**n * t + c2 * p ** (2 * n) * t**2).value


def jacobi_triple_check(x: float, q: float, K: int = 40) -> tuple[float, float]:
    """Both sides of sum_k q^{k^2} x^k = (q^2;q^2)(-qx;q^2)(-q/x;q^2)."""
    if x == 0:
        raise DomainError("x must be nonzero")
    k = np.arange(-K, K + 1)
    lhs = float(np.sum(q ** (k.astype(float) ** 2) * np.power(float(x), k.astype(float))))
    q2 = q * q
    rhs = float(q_pochhammer(q2, q2) * q_pochhammer(-q * x, q2) * q_pochhammer(-q / x, q2))
    return lhs, rhs


def interior_mask(f: LatticeFn) -> np.ndarray:
    """Finite entries excluding the endpoint row (the Q^-1 boundary points)."""
    mask = np.isfinite(f.values)
    mask[:, 0] = False
    return mask


def geometric_lattice(q: float, b: float, x_min: float, a: float = 0.0, extended_precision: bool = False) -> QLattice:
    """Lattice on [a, b]_q deep enough that its smallest b-branch point is ~x_min."""
    depth = int(np.ceil(np.log(x_min / b) / np.log(q))) + 1
    return QLattice(q, a, b, max(depth, 3), extended_precision)


def q_derivative_outward(f: LatticeFn, boundary: str = "zero") -> LatticeFn:
    """d_q Q^-1 f = (f(x/q) - f(x)) / ((1-q) x), defined at the deepest point too."""
    lat = f.lattice
    return f._wrap((shift_Qinv(f, boundary).values - f.values) / ((1.0 - lat.q) * lat.x))
