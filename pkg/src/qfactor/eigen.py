"""Ground states, creation ladders, closed-form densities and normalizability.

The ground state at level k solves the first-order relation A_k psi = 0,
i.e. psi(x) = psi(qx) / ((1-q) x phi_k(x)), seeded at the deepest lattice
point with x**xi_k.  Excited states come from applying creation operators to
lower ground states.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property

import numpy as np

from .chain import ChainParams, ParameterError, build_level
from .oper import annihilate, apply_H, create, hamiltonian
from .qcore import DomainError, LatticeFn, QLattice, interior_mask, q_bracket, quadratic_pochhammer

ZERO_TOL = 1e-12


class RegimeError(ParameterError):
    """Parameters do not match the requested regime or product form."""


class Regime(Enum):
    GAMMA_POS_B0 = "gamma>0, b0!=0"
    GAMMA_POS_B1 = "gamma>0, b0=0, b1!=0, h!=0"
    GAMMA_POS_B2 = "gamma>0, b0=b1=h=0, b2!=0"
    GAMMA_ZERO = "gamma=0"
    GAMMA_NEG_B2 = "gamma<0, b2!=0"
    GAMMA_NEG_B1 = "gamma<0, b2=0, b1!=0, h!=0, d1 a0=a1"
    GAMMA_NEG_B0 = "gamma<0, b2=b1=h=0, b0!=0, d1 a0=a1"


def _zero(v: float) -> bool:
    return abs(v) <= ZERO_TOL


def _shape_exponent(params: ChainParams, regime: Regime) -> float:
    g = params.gamma
    if regime in (Regime.GAMMA_POS_B0, Regime.GAMMA_NEG_B0):
        return 1 - 2 * g
    if regime in (Regime.GAMMA_POS_B1, Regime.GAMMA_NEG_B1):
        return 1 - g
    return 1.0


def classify_regime(params: ChainParams) -> Regime:
    """Row of the A_0 / xi_k table matching (gamma, b0, b1, b2, h)."""
    p, g = params, params.gamma
    pearson_const = _pearson_constant(p)
    if g > 0:
        if not _zero(p.b0):
            reg = Regime.GAMMA_POS_B0
        elif not _zero(p.b1) and not _zero(p.h):
            reg = Regime.GAMMA_POS_B1
        elif _zero(p.b1) and _zero(p.h) and not _zero(p.b2):
            if _zero(pearson_const):
                raise RegimeError("gamma>0, b0=b1=h=0 needs q^(g+1) b2 + (1-q) q^g (d1 a0 - a1)/([g] d1) != 0")
            reg = Regime.GAMMA_POS_B2
        else:
            raise RegimeError(f"no gamma>0 row matches b0={p.b0}, b1={p.b1}, b2={p.b2}, h={p.h}")
    elif g == 0:
        reg = Regime.GAMMA_ZERO
    else:
        linked = np.isclose(p.d(1) * p.a0, p.a1, rtol=1e-12, atol=1e-14)
        if not _zero(p.b2):
            if _zero(pearson_const):
                raise RegimeError("gamma<0, b2!=0 needs a nonzero limit of alpha_0 at 0")
            reg = Regime.GAMMA_NEG_B2
        elif not _zero(p.b1) and not _zero(p.h) and linked:
            reg = Regime.GAMMA_NEG_B1
        elif _zero(p.b1) and _zero(p.h) and not _zero(p.b0) and linked:
            reg = Regime.GAMMA_NEG_B0
        else:
            raise RegimeError(f"no gamma<0 row matches b0={p.b0}, b1={p.b1}, b2={p.b2}, h={p.h}, "
                              f"d1 a0 - a1 = {p.d(1) * p.a0 - p.a1}")
    _A_at_zero(p, reg)  # shape check
    return reg


def _pearson_constant(p: ChainParams) -> float:
    """q^(g+1) b2 + (1-q) q^g (d1 a0 - a1)/([g] d1): the x -> 0 limit of (1-q)^2 alpha_0 when b0=b1=h=0."""
    q, g = p.q, p.gamma
    if g == 0:
        return q * p.b2
    return q ** (g + 1) * p.b2 + (1 - q) * q**g * (p.d(1) * p.a0 - p.a1) / (q_bracket(g, q) * p.d(1))


def _A_at_zero(p: ChainParams, regime: Regime) -> float:
    """A(0) where A_0(x) = x**e A(x) with e the regime's shape exponent."""
    if not any(c != 0 for c in p.A0_coeffs):
        return 0.0
    offset = p.A0_shift - _shape_exponent(p, regime)
    j = round(offset)
    if abs(offset - j) > 1e-12 or j < 0:
        raise RegimeError(f"A_0 = x^{p.A0_shift} * poly does not fit the x^{_shape_exponent(p, regime)} A(x) "
                          f"shape of regime '{regime.value}'")
    return float(p.A0_coeffs[0]) if j == 0 else 0.0


def _log_q(v: float, q: float, what: str) -> float:
    if not v > 0:
        raise RegimeError(f"log_q argument for {what} is non-positive ({v})")
    return float(np.log(v) / np.log(q))


def xi_table(params: ChainParams, k: int) -> float:
    """Exponent xi_k from the regime table."""
    p, q, g = params, params.q, params.gamma
    reg = classify_regime(p)
    A = _A_at_zero(p, reg)
    lead = -(g - 1) * k
    if reg in (Regime.GAMMA_POS_B0, Regime.GAMMA_NEG_B0):
        arg = q ** (g - 1) - (1 - q) * q ** (g - 1) * A / p.b0
    elif reg in (Regime.GAMMA_POS_B1, Regime.GAMMA_NEG_B1):
        arg = (p.b1 - (1 - q) * A) / ((1 - q) ** 2 * p.h)
    elif reg in (Regime.GAMMA_POS_B2, Regime.GAMMA_NEG_B2):
        arg = (p.b2 - (1 - q) * A) / _pearson_constant(p)
    else:
        # the table's alpha is the constant value h of alpha_0
        return k - 0.5 * _log_q((p.b2 + p.b1 + p.b0 - (1 - q) * A) / ((1 - q) ** 2 * p.h), q, "xi_k")
    return lead - 0.5 * _log_q(arg, q, "xi_k")


def xi_limit(params: ChainParams, k: int, y: float = 1e-10) -> float:
    """log_q of (1-q) y phi_k(y) at small y: the numerical counterpart of xi_table."""
    q = params.q
    return float(np.log((1 - q) * y * params.phi(k, np.array([y]))[0]) / np.log(q))


@dataclass(frozen=True)
class GroundStateSpec:
    k: int
    xi_k: float
    regime: Regime


def ground_state_spec(params: ChainParams, k: int) -> GroundStateSpec:
    return GroundStateSpec(k, xi_table(params, k), classify_regime(params))


def weighted_residual(params: ChainParams, k: int, psi: LatticeFn, lam: float) -> float:
    """||H_k psi - lam psi|| / ||psi|| in the rho_k-weighted Jackson norm over interior points."""
    lev = build_level(params, psi.lattice, k)
    r = apply_H(hamiltonian(lev), psi) - lam * psi
    lat = psi.lattice
    w = (1 - lat.q) * lat.x * np.abs(lev.rhok.values)
    mask = interior_mask(r) & np.isfinite(psi.values)
    num = np.sum((w * r.values**2)[mask])
    den = np.sum((w * psi.values**2)[mask])
    return float(np.sqrt(num / den)) if den > 0 else float("nan")


@dataclass(frozen=True)
class EigenPair:
    psi: LatticeFn
    lam: float
    n: int
    k: int
    params: ChainParams = field(repr=False)
    normalized: bool = False

    @cached_property
    def residual(self) -> float:
        return weighted_residual(self.params, self.k, self.psi, self.lam)


def annihilation_residual(params: ChainParams, k: int, psi: LatticeFn) -> float:
    """max |A_k psi| relative to the size of its two terms, over points where it is defined."""
    lev = build_level(params, psi.lattice, k)
    lat = psi.lattice
    out = annihilate(lev, psi).values
    scale = np.abs(lev.phik.values * psi.values) + np.abs(np.roll(psi.values, -1, axis=1)) / ((1 - lat.q) * lat.x)
    r = np.abs(out) / scale
    return float(np.max(r[np.isfinite(r)]))


def _jackson_norm2(psi: np.ndarray, rho: np.ndarray, lat: QLattice) -> float:
    w = (1 - lat.q) * lat.x * np.abs(rho)
    m = np.isfinite(psi)
    return float(np.sum((w * psi**2)[m]))


def _log_recursion(logstep: np.ndarray, seed: np.ndarray) -> np.ndarray:
    """log psi(x_n) = seed - sum_{m=n}^{N-2} logstep_m."""
    acc = np.zeros_like(logstep)
    acc[:, :-1] = np.cumsum(logstep[:, :-1][:, ::-1], axis=1)[:, ::-1]
    return seed[:, None] - acc


def ground_state_unseeded(params: ChainParams, lattice: QLattice, k: int) -> LatticeFn:
    """Solution of A_k psi = 0 with psi = 1 at the deepest point (no regime needed)."""
    lev = build_level(params, lattice, k)
    step = (1 - lattice.q) * lattice.x * lev.phik.values
    if np.any(~(step > 0)):
        raise DomainError("phi_k must be positive on the lattice for the ground-state recursion")
    return LatticeFn(lattice, np.exp(_log_recursion(np.log(step), np.zeros(step.shape[0]))))


def ground_state(params: ChainParams, lattice: QLattice, k: int, normalize: bool = True,
                 factor_tol: float = 0.1) -> EigenPair:
    """psi_k^0 by the first-rank recursion from the deepest point outward; eigenvalue a_k."""
    spec = ground_state_spec(params, k)
    lev = build_level(params, lattice, k)
    q, x = lattice.q, lattice.x
    step = (1 - q) * x * lev.phik.values
    if np.any(~(step > 0)):
        raise DomainError("phi_k must be positive on the lattice for the ground-state recursion")
    logstep = np.log(step)
    # factor q^xi / ((1-q) x phi_k) of the infinite product must approach 1
    tail = np.abs(spec.xi_k * np.log(q) - logstep[:, -1])
    if np.any(tail > factor_tol):
        raise RegimeError(f"ground-state product factors do not tend to 1 (|log factor| = {tail.max():.3g} "
                          f"at the deepest point); xi_k = {spec.xi_k} does not fit these parameters")
    psi = np.exp(_log_recursion(logstep, spec.xi_k * np.log(x[:, -1])))
    done = False
    if normalize:
        try:
            member, _ = membership(params, k)
        except ParameterError:
            member = False
        if member:
            psi = psi / np.sqrt(_jackson_norm2(psi, lev.rhok.values, lattice))
            done = True
    if not np.all(np.isfinite(psi)):
        raise DomainError("ground state overflowed; use a shallower lattice")
    return EigenPair(LatticeFn(lattice, psi), lev.ak, 0, k, params, done)


def ladder_eigenvalue(params: ChainParams, k: int, n: int) -> float:
    """d_k d_{k-1} ... d_{k-n+1} a_{k-n}."""
    out = params.a(k - n)
    for j in range(k - n + 1, k + 1):
        out = out * params.d(j)
    return out


def ladder_up(params: ChainParams, lattice: QLattice, k: int, n: int) -> EigenPair:
    """A_k^* ... A_{k-n+1}^* psi_{k-n}^0, built on a lattice extended by n outer
    points so no Q^-1 boundary convention leaks into the result."""
    if n < 0 or n > k:
        raise ValueError(f"ladder height n={n} must satisfy 0 <= n <= k={k}")
    if n == 0:
        return ground_state(params, lattice, k)
    ext = lattice.extended(outer=n)
    psi = ground_state(params, ext, k - n, normalize=False).psi
    for j in range(k - n + 1, k + 1):
        psi = create(build_level(params, ext, j), psi, boundary="nan")
    return EigenPair(psi.restrict(lattice, n), ladder_eigenvalue(params, k, n), n, k, params)


def ladder_down(params: ChainParams, state: EigenPair) -> LatticeFn:
    """Apply A_k, A_{k-1}, ..., A_{k-n+1} to a level-k ladder state."""
    psi = state.psi
    for j in range(state.k, state.k - state.n, -1):
        psi = annihilate(build_level(params, psi.lattice, j), psi)
    return psi


def weighted_cosine(u: LatticeFn, v: LatticeFn, rho: LatticeFn) -> float:
    lat = u.lattice
    w = (1 - lat.q) * lat.x * np.abs(rho.values)
    m = np.isfinite(u.values) & np.isfinite(v.values)
    uv = np.sum((w * u.values * v.values)[m])
    return float(uv / np.sqrt(np.sum((w * u.values**2)[m]) * np.sum((w * v.values**2)[m])))


def gram_matrix(params: ChainParams, k: int, states: list[LatticeFn]) -> np.ndarray:
    """<psi_i, psi_j>_k over points where every state is defined."""
    lat = states[0].lattice
    rho = build_level(params, lat, k).rhok.values
    w = (1 - lat.q) * lat.x * rho
    m = np.all([np.isfinite(s.values) for s in states], axis=0)
    V = np.array([s.values[m] for s in states])
    return (V * w[m]) @ V.T


# -- densities |psi_k^0|^2 rho_k ------------------------------------------------


def _p_coeffs(p: ChainParams):
    """(m, c1, c2): m = b2 + (1-q)^2 (d1 a0 - a1)/((1-q^g) q d1) and the
    coefficients of the denominator quadratic c2 t^2 + c1 t + b0."""
    q, g = p.q, p.gamma
    m = p.b2 + (1 - q) ** 2 * (p.d(1) * p.a0 - p.a1) / ((1 - q**g) * q * p.d(1))
    return m, (1 - q) ** 2 * q ** (g - 1) * p.h, q ** (2 * g) * m


def proposition_case(params: ChainParams) -> str:
    """Case label '1', 'i', ..., 'viii' for the closed form of |psi_k^0|^2 rho_k.

    Cases i-v also accept b2 = 0 (a root at infinity drops out of the product).
    """
    p, g = params, params.gamma
    if g == 0:
        return "1"
    if g < 0:
        raise RegimeError("no closed-form density case for gamma < 0")
    m, _, _ = _p_coeffs(p)
    mz = _zero(m)
    if not _zero(p.b0):
        return "iii" if mz and _zero(p.h) else ("ii" if mz else "i")
    if not _zero(p.b1):
        if not _zero(p.h):
            return "v" if mz else "iv"
        if mz:
            raise RegimeError("b0=h=0, b1!=0 needs m != 0")
        return "vi"
    if not _zero(p.b2) and not mz:
        return "viii" if _zero(p.h) else "vii"
    raise RegimeError(f"parameters fit no density case: b0={p.b0}, b1={p.b1}, b2={p.b2}, h={p.h}, m={m}")


def _theta(v, p: float, sign: float):
    """(-s v; p)_inf (-s p / v; p)_inf with s = +-1."""
    return quadratic_pochhammer(sign, 0.0, v, p) * quadratic_pochhammer(sign, 0.0, p / v, p)


def _power(x, qr: float, q: float):
    """x**r with q**(-r) = qr."""
    if not qr > 0:
        raise RegimeError("q^(-r) must be positive")
    return np.exp(-np.log(qr) / np.log(q) * np.log(x))


def density_closed_form(params: ChainParams, lattice: QLattice, k: int, case_id: str | None = None) -> LatticeFn:
    """Closed-form |psi_k^0|^2 rho_k up to a constant factor (absolute value for
    the sign-alternating cases)."""
    p, q, g = params, params.q, params.gamma
    case = proposition_case(p)
    if case_id is not None and case_id != case:
        raise RegimeError(f"parameters belong to case {case}, not {case_id}")
    x = lattice.x
    if case == "1":
        return LatticeFn(lattice, _power(x, q**2 * (p.b2 + p.b1 + p.b0) / ((1 - q) ** 2 * p.h), q))
    m, c1, c2 = _p_coeffs(p)
    P = q**g
    tx, tu = (q * x) ** g, (q ** (-k) * x) ** g
    if case in ("i", "ii", "iii"):
        val = x ** (g - 1) * quadratic_pochhammer(p.b1 / p.b0, p.b2 / p.b0, tx, P) / \
            quadratic_pochhammer(c1 / p.b0, c2 / p.b0, tu, P)
    elif case in ("iv", "v"):
        qr = abs(q ** (2 + g * (k - 1)) * p.b1 / ((1 - q) ** 2 * p.h))
        den = quadratic_pochhammer(c2 / c1, 0.0, tu, P) if case == "iv" else 1.0
        val = _power(x, qr, q) * quadratic_pochhammer(p.b2 / p.b1, 0.0, tx, P) / den
    elif case == "vi":
        ratio = q ** (k * g + 1) * p.b1 / c2
        val = _power(x, abs(ratio), q) * quadratic_pochhammer(p.b2 / p.b1, 0.0, tx, P) / _theta(tu, P, np.sign(ratio))
    elif case == "vii":
        ratio = q ** (2 + k * g) * p.b2 / ((1 - q) ** 2 * p.h)
        val = _power(x, abs(ratio), q) * _theta(x**g, P, np.sign(ratio)) / quadratic_pochhammer(c2 / c1, 0.0, tu, P)
    else:  # viii
        val = _power(x, abs(q ** (1 - g + 2 * k * g) * p.b2 / m), q)
    return LatticeFn(lattice, np.abs(val))


def density_direct(params: ChainParams, lattice: QLattice, k: int) -> LatticeFn:
    psi = ground_state_unseeded(params, lattice, k)
    rho = build_level(params, lattice, k).rhok
    return LatticeFn(lattice, np.abs(psi.values**2 * rho.values))


def density_mismatch(params: ChainParams, lattice: QLattice, k: int) -> float:
    """Max relative gap between direct and closed-form densities after fitting
    one constant at the outermost point of each branch."""
    a = density_direct(params, lattice, k).values
    b = density_closed_form(params, lattice, k).values
    fitted = b * (a[:, :1] / b[:, :1])
    return float(np.max(np.abs(fitted - a) / np.abs(a)))


# -- membership ----------------------------------------------------------------


def membership(params: ChainParams, k: int) -> tuple[bool, str]:
    """Whether psi_k^0 is square-summable near 0, with the case label.

    The threshold conditions compare |ratio| against q, so the cases with a
    single inequality are applied to absolute values.
    """
    p, q, g = params, params.q, params.gamma
    case = proposition_case(p)
    if case == "1":
        S = p.b2 + p.b1 + p.b0
        return bool(p.h / S < q / (1 - q) ** 2), case
    if case in ("i", "ii", "iii", "vi"):
        return True, case
    if case in ("iv", "v"):
        return bool(abs(p.h / p.b1) < q ** (1 + g * (k - 1)) / (1 - q) ** 2), case
    if case == "vii":
        return False, case
    m, _, _ = _p_coeffs(p)
    return bool(abs(m / p.b2) < q ** (g * (2 * k - 1))), case


def density_ratio(params: ChainParams, k: int, x):
    """(|psi_k|^2 rho_k)(x) / (|psi_k|^2 rho_k)(qx) from the level-0 data."""
    p, q, g = params, params.q, params.gamma
    x = np.asarray(x, dtype=float)
    return q ** (2 * g * k) * p.B0(q * x) / ((1 - q) ** 2 * x**2 * p.alpha0(q ** (-k) * x))


def log_density_ratio(params: ChainParams, k: int, logx):
    """log |density_ratio| at x = exp(logx), written through the two quadratics
    in x**gamma so that tiny x neither underflows nor divides 0 by 0."""
    p, q, g = params, params.q, params.gamma
    logx = np.asarray(logx, dtype=float)
    if g == 0:
        c = q**2 * (p.b2 + p.b1 + p.b0) / ((1 - q) ** 2 * p.h)
        return np.full_like(logx, np.log(abs(c)))
    _, c1, c2 = _p_coeffs(p)

    def log_quad(coeffs, logt):
        # log |sum_i c_i t^i| with t = exp(logt), factoring out the lowest power
        j = next(i for i, c in enumerate(coeffs) if not _zero(c))
        rest = sum(c * np.exp((i - j) * logt) for i, c in enumerate(coeffs) if i > j)
        return j * logt + np.log(np.abs(coeffs[j] + rest))

    num = log_quad((p.b0, p.b1, p.b2), g * (np.log(q) + logx))
    den = log_quad((p.b0, c1, c2), g * (-k * np.log(q) + logx))
    return (1 - g) * np.log(q) + num - den


def summable(params: ChainParams, k: int, y: float = 1.0, N: int = 4000, tail_tol: float = 1e-6) -> bool:
    """Partial-sum test for sum_n q^n y F(q^n y) with F iterated from the ratio.

    Compares the partial sums at N and 2N terms; a relative change below
    ``tail_tol`` counts as convergent.
    """
    q = params.q
    n = np.arange(2 * N)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        logr = log_density_ratio(params, k, np.log(y) + n * np.log(q))
    if not np.all(np.isfinite(logr)):
        raise DomainError("density ratio is singular on the test points")
    # log F(q^n y) = -sum_{m<n} log R(q^m y)
    logF = np.concatenate([[0.0], -np.cumsum(logr[:-1])])
    logt = n * np.log(q) + logF
    top = np.max(logt)
    s_N = np.sum(np.exp(logt[:N] - top))
    s_2N = np.sum(np.exp(logt - top))
    if not np.isfinite(s_2N):
        return False
    return bool((s_2N - s_N) / s_2N < tail_tol)
