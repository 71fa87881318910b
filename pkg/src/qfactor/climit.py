"""The q -> 1 limit: classical chains, Riccati recursions and convergence scans.

Derivatives of grid functions use fourth-order central differences with step
``delta``.  Classical ladder states of the oscillators are kept exact as
Laurent polynomials times x**s exp(-beta x**2).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from numpy.polynomial import Polynomial
from scipy.integrate import quad

from .chain import ChainParams, ParameterError, qhahn_params
from .eigen import ladder_eigenvalue
from .oscillators import ground_values, harmonic_case, isotropic_case, osc_spectrum
from .qhahn import hahn_eigen, hahn_level

DELTA = 1e-4
GRID = (0.1, 3.0)


def d1(f: Callable, x, delta: float = DELTA):
    """Fourth-order central first derivative."""
    return (-f(x + 2 * delta) + 8 * f(x + delta) - 8 * f(x - delta) + f(x - 2 * delta)) / (12 * delta)


def d2(f: Callable, x, delta: float = DELTA):
    """Fourth-order central second derivative."""
    return (-f(x + 2 * delta) + 16 * f(x + delta) - 30 * f(x) + 16 * f(x - delta) - f(x - 2 * delta)) / (12 * delta**2)


def default_grid(n: int = 200, lo: float = GRID[0], hi: float = GRID[1]) -> np.ndarray:
    return np.linspace(lo, hi, n)


@dataclass(frozen=True)
class ClassicalChain:
    """Limit chain: B_k = D_k B0, A_k = D_k (A0 - k B0'), f_k = f0 + k (gamma-1)/x."""

    gamma: float
    b0: float = 0.0
    b1: float = 0.0
    b2: float = 0.0
    h_tilde: float = 0.0
    a0: float = 1.0
    a1: float = 0.5
    d_list: tuple[float, ...] = ()
    A0_shift: float = 0.0
    A0_coeffs: tuple[float, ...] = ()
    alpha_tilde: float = 0.0
    f0_integral: Callable | None = field(default=None, compare=False, repr=False)

    def d(self, k: int) -> float:
        if k < 1:
            raise ValueError("d_k is defined for k >= 1")
        if not self.d_list:
            return 1.0
        if k > len(self.d_list):
            raise ParameterError(f"d_{k} requested but only {len(self.d_list)} given")
        return float(self.d_list[k - 1])

    def D(self, k: int) -> float:
        return float(np.prod([self.d(j) for j in range(1, k + 1)]))

    def _terms(self):
        g = self.gamma
        return ((self.b2, 2.0), (self.b1, 2.0 - g), (self.b0, 2.0 - 2 * g))

    def B0(self, x):
        return sum(c * x**e for c, e in self._terms())

    def dB0(self, x):
        return sum(c * e * x ** (e - 1) for c, e in self._terms())

    def d2B0(self, x):
        return sum(c * e * (e - 1) * x ** (e - 2) for c, e in self._terms())

    def A0(self, x):
        return sum(c * x ** (self.A0_shift + i) for i, c in enumerate(self.A0_coeffs)) + 0 * x

    def dA0(self, x):
        return sum(c * (self.A0_shift + i) * x ** (self.A0_shift + i - 1) for i, c in enumerate(self.A0_coeffs)) + 0 * x

    def B(self, k: int, x):
        return self.D(k) * self.B0(x)

    def A(self, k: int, x):
        return self.D(k) * (self.A0(x) - k * self.dB0(x))

    def dB(self, k: int, x):
        return self.D(k) * self.dB0(x)

    def d2B(self, k: int, x):
        return self.D(k) * self.d2B0(x)

    def dA(self, k: int, x):
        return self.D(k) * (self.dA0(x) - k * self.d2B0(x))

    def f0(self, x):
        g = self.gamma
        if g == 0:
            return -self.alpha_tilde / (2 * x) + self.A0(x) / (2 * (self.b2 + self.b1 + self.b0) * x**2)
        shift = (self.d(1) * self.a0 - self.a1) / (g * self.d(1))
        num = (
            -self.b2 * (g + 1) * x
            + shift * x
            - self.b1 * self.h_tilde * x ** (1 - g)
            - self.b0 * (1 - g) * x ** (1 - 2 * g)
            + self.A0(x)
        )
        return num / (2 * self.B0(x))

    def f(self, k: int, x):
        return self.f0(x) + k * (self.gamma - 1) / x

    def a(self, k: int) -> float:
        """a_k = D_k (-a0 (k-1) + a1 k / d1 - b2 gamma^2 k (k-1))."""
        if k == 0:
            return self.a0
        return self.D(k) * (-self.a0 * (k - 1) + self.a1 / self.d(1) * k - self.b2 * self.gamma**2 * k * (k - 1))

    def eigenvalue(self, k: int, n: int) -> float:
        """lambda_k^n = D_k (-a0 (k-n-1) + a1 (k-n) / d1 - b2 gamma^2 (k-n)(k-n-1))."""
        m = k - n
        return self.D(k) * (-self.a0 * (m - 1) + self.a1 / self.d(1) * m - self.b2 * self.gamma**2 * m * (m - 1))

    def int_f0(self, x, x_ref: float = 1.0):
        """int_{x_ref}^x f0(t) dt (a closed form when registered, else adaptive quadrature)."""
        if self.f0_integral is not None:
            return self.f0_integral(x) - self.f0_integral(x_ref)
        x = np.atleast_1d(np.asarray(x, dtype=float))
        return np.array([quad(self.f0, x_ref, xi, epsabs=1e-12, epsrel=1e-10)[0] for xi in x])

    def ground(self, k: int, x_ref: float = 1.0) -> Callable:
        """psi_k^0 = x^(-k(gamma-1)) exp(-int f0), normalized to 1 at x_ref."""
        return lambda x: x ** (-k * (self.gamma - 1)) * np.exp(-self.int_f0(x, x_ref)) / x_ref ** (-k * (self.gamma - 1))


def classical_harmonic(a0: float = 1.0, a1: float = 0.5) -> ClassicalChain:
    w = (a0 - a1) / 2
    return ClassicalChain(gamma=1.0, b0=1.0, a0=a0, a1=a1, f0_integral=lambda x: w * np.asarray(x) ** 2 / 2)


def classical_isotropic(a0: float = 1.0, a1: float = 0.5, h_tilde: float = 1.0) -> ClassicalChain:
    w = (a0 - a1) / 4
    return ClassicalChain(gamma=2.0, b1=1.0, h_tilde=h_tilde, a0=a0, a1=a1,
                          f0_integral=lambda x: w * np.asarray(x) ** 2 / 2 - h_tilde / 2 * np.log(x))


def classical_hahn(b2: float = -1.0, b1: float = 1.0, b0: float = 0.0, a0: float = 1.0, a1: float = 0.5,
                   h_tilde: float = 3.5) -> ClassicalChain:
    """gamma = 1 with A0 chosen so f0 vanishes: A0 = (2 b2 + a1 - a0) x + b1 h_tilde."""
    return ClassicalChain(gamma=1.0, b0=b0, b1=b1, b2=b2, h_tilde=h_tilde, a0=a0, a1=a1,
                          A0_coeffs=(b1 * h_tilde, 2 * b2 + a1 - a0))


def classical_apply_H(chain: ClassicalChain, k: int, f: Callable, x, delta: float = DELTA):
    """(-B_k d^2 - A_k d + (f_k^2 - f_k') B_k - f_k A_k + a_k) f on the grid x."""
    x = np.asarray(x, dtype=float)
    B, A = chain.B(k, x), chain.A(k, x)
    fk = chain.f(k, x)
    dfk = d1(lambda t: chain.f(k, t), x, delta)
    fx = f(x)
    return -B * d2(f, x, delta) - A * d1(f, x, delta) + ((fk**2 - dfk) * B - fk * A + chain.a(k)) * fx


def riccati_residual(chain: ClassicalChain, k: int, x=None, delta: float = DELTA) -> np.ndarray:
    """Pointwise residual of
    B_k (f_{k+1}^2 - f_k^2 + f_{k+1}' + f_k') - A_k (f_{k+1} - f_k) + 2 B_k' f_{k+1} - A_k' + B_k''
        = a_k - a_{k+1} / d_{k+1},
    relative to the largest term."""
    x = default_grid() if x is None else np.asarray(x, dtype=float)
    fk, fn = chain.f(k, x), chain.f(k + 1, x)
    dfk = d1(lambda t: chain.f(k, t), x, delta)
    dfn = d1(lambda t: chain.f(k + 1, t), x, delta)
    B, A = chain.B(k, x), chain.A(k, x)
    terms = [B * fn**2, B * fk**2, B * dfn, B * dfk, A * fn, A * fk, 2 * chain.dB(k, x) * fn,
             chain.dA(k, x), chain.d2B(k, x)]
    lhs = B * (fn**2 - fk**2 + dfn + dfk) - A * (fn - fk) + 2 * chain.dB(k, x) * fn - chain.dA(k, x) + chain.d2B(k, x)
    rhs = chain.a(k) - chain.a(k + 1) / chain.d(k + 1)
    scale = np.max([np.max(np.abs(t)) for t in terms] + [abs(rhs), 1.0])
    return np.abs(lhs - rhs) / scale


# -- exact classical ladder states ---------------------------------------------


@dataclass(frozen=True)
class LaurentState:
    """x**s exp(-beta x**2) * sum_j c_j x**j (Laurent coefficients, powers p0..p0+len-1)."""

    s: float
    beta: float
    p0: int
    coeffs: tuple[float, ...]

    def laurent(self, x):
        x = np.asarray(x, dtype=float)
        return sum(c * x ** (self.p0 + j) for j, c in enumerate(self.coeffs))

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return x**self.s * np.exp(-self.beta * x**2) * self.laurent(x)

    def apply_first_order(self, u: float, v: float) -> "LaurentState":
        """(-d/dx + u x + v / x) applied exactly."""
        n = len(self.coeffs)
        p0 = self.p0 - 1
        out = np.zeros(n + 2)  # powers p0 .. p0 + n + 1
        for j, c in enumerate(self.coeffs):
            p = self.p0 + j
            # -d/dx(x^(s+p) e^(-beta x^2)) = (-(s+p) x^(p-1) + 2 beta x^(p+1)) x^s e^...
            out[p - 1 - p0] += c * (v - (self.s + p))
            out[p + 1 - p0] += c * (u + 2 * self.beta)
        return LaurentState(self.s, self.beta, p0, tuple(out))


def classical_harmonic_state(a0: float, a1: float, n: int) -> LaurentState:
    """(-d/dx + (a0-a1) x / 2)^n exp(-(a0-a1) x^2 / 4)."""
    w = (a0 - a1) / 2
    st = LaurentState(0.0, w / 2, 0, (1.0,))
    for _ in range(n):
        st = st.apply_first_order(w, 0.0)
    return st


def classical_isotropic_state(a0: float, a1: float, h_tilde: float, k: int, n: int) -> LaurentState:
    """prod_{i=k-n+1}^{k} (-d/dx + (a0-a1) x / 4 - h_tilde / (2x) + i / x) x^(h_tilde/2 - k + n) exp(-(a0-a1) x^2 / 8)."""
    if n > k:
        raise ValueError(f"the 3D ladder needs n <= k, got n={n}, k={k}")
    w = (a0 - a1) / 4
    st = LaurentState(h_tilde / 2 - (k - n), w / 2, 0, (1.0,))
    for i in range(k - n + 1, k + 1):
        st = st.apply_first_order(w, i - h_tilde / 2)
    return st


def classical_isotropic_H(a0: float, a1: float, h_tilde: float, k: int, f: Callable, x, delta: float = DELTA):
    """The displayed classical 3D Hamiltonian applied to f."""
    x = np.asarray(x, dtype=float)
    c = k - h_tilde / 2
    V = c * (c + 1) / x**2 + (a0 - a1) ** 2 / 16 * x**2 - (a0 - a1) / 2 * (k + h_tilde / 2) + (3 * a0 + a1) / 4
    return -d2(f, x, delta) + V * f(x)


def classical_hahn_polys(chain: ClassicalChain, k: int, n_max: int) -> list[tuple[Polynomial, float]]:
    """psi_k^n = (B0 d + A_k)...(B0 d + A_{k-n+1}) 1 with lambda = a~_k n + b2 n (n-1)."""
    if chain.gamma != 1.0:
        raise ParameterError("the classical polynomial family needs gamma = 1")
    B = Polynomial([chain.b0, chain.b1, chain.b2])

    def A(j):
        return Polynomial([chain.b1 * (chain.h_tilde - j), -2 * (j - 1) * chain.b2 + chain.a1 - chain.a0])

    a_t = -2 * (k - 1) * chain.b2 + chain.a1 - chain.a0
    out = []
    for n in range(n_max + 1):
        p = Polynomial([1.0])
        for j in range(k - n + 1, k + 1):
            p = B * p.deriv() + A(j) * p
        out.append((p, a_t * n + chain.b2 * n * (n - 1)))
    return out


def classical_hahn_residual(chain: ClassicalChain, k: int, p: Polynomial, lam: float, x=None,
                            delta: float | None = None) -> float:
    """max |B0 P'' + A_k P' - lam P| / max(|B0 P''| + |A_k P'| + |lam P|) on the grid.

    Derivatives are exact by default; pass ``delta`` for central differences,
    whose roundoff floor at delta = 1e-4 is about 1e-7 for P''.
    """
    x = default_grid() if x is None else np.asarray(x, dtype=float)
    B = chain.b2 * x**2 + chain.b1 * x + chain.b0
    A = (-2 * (k - 1) * chain.b2 + chain.a1 - chain.a0) * x + chain.b1 * (chain.h_tilde - k)
    if delta is None:
        P2, P1 = p.deriv(2)(x), p.deriv(1)(x)
    else:
        P2, P1 = d2(p, x, delta), d1(p, x, delta)
    P = p(x)
    r = np.abs(B * P2 + A * P1 - lam * P)
    scale = np.max(np.abs(B * P2) + np.abs(A * P1) + np.abs(lam * P))
    return float(np.max(r) / scale) if scale > 0 else float(np.max(r))


# -- convergence scans -----------------------------------------------------------


@dataclass(frozen=True)
class ScanRow:
    q: float
    q_value: float
    classical: float
    gap: float
    order: float | None  # log-ratio of this gap against the previous row's


def _orders(qs, gaps):
    out = [None]
    for i in range(1, len(qs)):
        g0, g1 = gaps[i - 1], gaps[i]
        if g0 > 0 and g1 > 0:
            out.append(float(np.log(g0 / g1) / np.log((1 - qs[i - 1]) / (1 - qs[i]))))
        else:
            out.append(float("nan"))
    return out


def _harmonic_lambda(q, k=2, n=1, a0=1.0, a1=0.5, h=0.3):
    return osc_spectrum(harmonic_case(q, a0=a0, a1=a1, h=h), k, n), a0 + (a0 - a1) * (n - k)


def _isotropic_lambda(q, k=2, n=1, a0=1.0, a1=0.5, h=0.5):
    return osc_spectrum(isotropic_case(q, a0=a0, a1=a1, h=h), k, n), a0 + (a1 - a0) * (k - n)


def _hahn_lambda(q, k=3, n=2, b2=-1.0, b1=1.0, b0=0.0, a0=1.0, a1=0.5, h_tilde=3.5):
    p = qhahn_params(q, b2=b2, b1=b1, b0=b0, a1=a1, a0=a0, h_tilde=h_tilde)
    cl = (-2 * (k - 1) * b2 + a1 - a0) * n + b2 * n * (n - 1)
    return hahn_eigen(hahn_level(p, k), n), cl


def _chain_lambda(q, params_at: Callable[[float], ChainParams], classical: ClassicalChain, k=2, n=1):
    return ladder_eigenvalue(params_at(q), k, n), classical.eigenvalue(k, n)


def _harmonic_ground(q, a0=1.0, a1=0.5, h=0.3, k=0, x=None):
    """max over a fixed grid of |psi_q(x) - exp(-(a0-a1) x^2 / 4)| with psi_q(0) = 1."""
    x = np.linspace(0.1, 2.0, 20) if x is None else np.asarray(x, dtype=float)
    psi = ground_values(harmonic_case(q, a0=a0, a1=a1, h=h), x, k)
    cl = np.exp(-(a0 - a1) * x**2 / 4)
    gap = float(np.max(np.abs(psi - cl)))
    return gap, 0.0


SCANS: dict[str, Callable] = {
    "harmonic_lambda": _harmonic_lambda,
    "isotropic_lambda": _isotropic_lambda,
    "hahn_lambda": _hahn_lambda,
    "chain_lambda": _chain_lambda,
    "harmonic_ground": _harmonic_ground,
}


def limit_scan(quantity: str, q_list, **kw) -> list[ScanRow]:
    """q-quantity against its classical target for q in q_list (increasing toward 1)."""
    if quantity not in SCANS:
        raise KeyError(f"unknown scan {quantity!r}; choose from {sorted(SCANS)}")
    qs = [float(q) for q in q_list]
    if any(b <= a for a, b in zip(qs, qs[1:])):
        raise ValueError("q_list must increase toward 1")
    vals = []
    for q in qs:
        try:
            vals.append(SCANS[quantity](q, **kw))
        except Exception as exc:  # annotate which q failed
            raise type(exc)(f"{exc} (at q={q})") from exc
    gaps = [abs(a - b) for a, b in vals]
    orders = _orders(qs, gaps)
    return [ScanRow(q, float(a), float(b), float(g), o) for q, (a, b), g, o in zip(qs, vals, gaps, orders)]


def scan_order_ok(rows: list[ScanRow], lo: float = 0.8, hi: float = 1.2, cancel: float = 1.8) -> bool:
    """Every empirical order lies in [lo, hi], or is >= ``cancel`` (leading term cancels)."""
    orders = [r.order for r in rows if r.order is not None]
    return all(np.isfinite(o) and (lo <= o <= hi or o >= cancel) for o in orders)
