"""L-function machinery near s = 1/2 and numerical checks of the transform
identities tying L(s, chi_D) to partial character sums, Fekete polynomials,
and theta functions.

High-precision reference values of L(s, chi_D) and L'(s, chi_D) for real
0 < s <= 1 come from the exact periodic decomposition

    L(s, chi_D) = q^(-s) * sum_{r=1}^{q-1} chi_D(r) zeta(s, r/q),   q = |D|,

(Hurwitz zeta; the digamma formula at s = 1), which is the closed form of
Abel summation over whole periods.  All identity checks compute their right
sides by an independent route (piecewise-exact integration or adaptive
quadrature) and report a relative residual.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import mpmath as mp
import numpy as np
from scipy import integrate

from .arith import sieve_primes
from .character import (
    DELETED_ZEROS,
    QuadraticCharacter,
    SignChangeReport,
    sign_changes,
)
from .errors import DomainError, NumericalError

MP_DPS = 30


def _as_character(D) -> QuadraticCharacter:
    return D if isinstance(D, QuadraticCharacter) else QuadraticCharacter(int(D))


# --------------------------------------------------------------------------
# Reference L-values (Hurwitz zeta / digamma route)

_l_cache: dict[tuple[int, float, int], float] = {}


def l_value(D, s: float) -> float:
    """L(s, chi_D) for real 0 < s <= 1, accurate to well below 1e-15."""
    chr = _as_character(D)
    key = (chr.D, float(s), 0)
    if key in _l_cache:
        return _l_cache[key]
    q = chr.modulus
    tbl = chr.table
    with mp.workdps(MP_DPS):
        if s == 1.0:
            total = -mp.fsum(
                int(tbl[r]) * mp.digamma(mp.mpf(r) / q)
                for r in range(1, q)
                if tbl[r]
            ) / q
        else:
            ms = mp.mpf(s)
            total = mp.power(q, -ms) * mp.fsum(
                int(tbl[r]) * mp.zeta(ms, mp.mpf(r) / q)
                for r in range(1, q)
                if tbl[r]
            )
        out = float(total)
    _l_cache[key] = out
    return out


def l_derivative(D, s: float) -> float:
    """L'(s, chi_D) (derivative in s) for real 0 < s <= 1."""
    chr = _as_character(D)
    key = (chr.D, float(s), 1)
    if key in _l_cache:
        return _l_cache[key]
    q = chr.modulus
    tbl = chr.table
    if s == 1.0:
        # zeta'(s, a) has a double pole at s = 1; L itself is entire, so a
        # central difference at high working precision is exact to ~1e-30
        with mp.workdps(60):
            h = mp.mpf(10) ** -15
            out = float((_l_mp(tbl, q, 1 + h) - _l_mp(tbl, q, 1 - h)) / (2 * h))
    else:
        with mp.workdps(MP_DPS):
            ms = mp.mpf(s)
            zp = mp.fsum(
                int(tbl[r]) * mp.zeta(ms, mp.mpf(r) / q, 1)
                for r in range(1, q)
                if tbl[r]
            )
            out = float(-mp.log(q) * _l_mp(tbl, q, ms) + mp.power(q, -ms) * zp)
    _l_cache[key] = out
    return out


def _l_mp(tbl, q: int, s):
    return mp.power(q, -s) * mp.fsum(
        int(tbl[r]) * mp.zeta(s, mp.mpf(r) / q) for r in range(1, q) if tbl[r]
    )


# --------------------------------------------------------------------------
# Smoothed prime-sum surrogates

@dataclass
class SmoothedLValue:
    D: int
    s: float
    y: float
    value: float
    kind: str
    window: tuple[float, float] | None = None


_WEIGHT_CACHE: dict = {}


def _lambda_weights(s: float, y: float, log_weight: bool, n_max: int):
    """Per-power-k weight vectors w(p,k) e^(-p^k/y) and the primes they pair
    with; independent of the character, so cached across a family sweep."""
    key = (s, y, log_weight, n_max)
    out = _WEIGHT_CACHE.get(key)
    if out is None:
        primes = sieve_primes(max(2, n_max)).primes
        logp = np.log(primes.astype(np.float64))
        out = []
        k = 1
        while 2 ** k <= n_max:
            pk = primes.astype(np.float64) ** k
            mask = pk <= n_max
            p_used = pk[mask]
            if log_weight:
                w = 1.0 / (k * p_used ** s)
            else:
                w = logp[mask] / p_used ** s
            out.append((primes[mask], k, w * np.exp(-p_used / y)))
            k += 1
        if len(_WEIGHT_CACHE) > 16:
            _WEIGHT_CACHE.clear()
        _WEIGHT_CACHE[key] = out
    return out


def _lambda_weighted_sum(
    chr: QuadraticCharacter, s: float, y: float, log_weight: bool, n_max: int | None
) -> float:
    """sum over prime powers p^k <= n_max of chi(p)^k w(p,k) e^(-p^k/y) with
    w = log(p)/p^(ks) (von Mangoldt) or 1/(k p^(ks)) (log-L weights)."""
    if n_max is None:
        n_max = math.ceil(y * (12.0 * math.log(10.0) + math.log(y)))
    total = 0.0
    for primes_k, k, w in _lambda_weights(s, y, log_weight, n_max):
        c = chr.chi_many(primes_k).astype(np.float64)
        if k > 1:
            c **= k
        total += float(np.dot(c, w))
    return total


def smoothed_l_prime_over_l(D, s: float, y: float, n_max: int | None = None) -> SmoothedLValue:
    """Smoothed surrogate for L'/L(s, chi_D):
    -(sum_n Lambda(n) chi_D(n) n^(-s) e^(-n/y)), prime powers included."""
    if not 0.5 < s <= 1.0:
        raise DomainError(f"need 1/2 < s <= 1, got {s}")
    if y < 2:
        raise DomainError(f"need y >= 2, got {y}")
    chr = _as_character(D)
    val = -_lambda_weighted_sum(chr, s, y, log_weight=False, n_max=n_max)
    return SmoothedLValue(D=chr.D, s=s, y=y, value=val, kind="l_prime_over_l")


def smoothed_log_l(D, s: float, y: float, n_max: int | None = None) -> SmoothedLValue:
    """Smoothed surrogate for log L(s, chi_D):
    sum_n Lambda(n)/log(n) chi_D(n) n^(-s) e^(-n/y)."""
    if not 0.5 < s <= 1.0:
        raise DomainError(f"need 1/2 < s <= 1, got {s}")
    if y < 2:
        raise DomainError(f"need y >= 2, got {y}")
    chr = _as_character(D)
    val = _lambda_weighted_sum(chr, s, y, log_weight=True, n_max=n_max)
    return SmoothedLValue(D=chr.D, s=s, y=y, value=val, kind="log_l")


def dirichlet_window(D, s: float, u: float, v: float) -> SmoothedLValue:
    """Windowed Dirichlet polynomial sum_{u < p < v} chi_D(p) log(p)/p^s."""
    if not (2 <= u < v):
        raise DomainError(f"need 2 <= u < v, got u={u}, v={v}")
    if not 0.5 < s <= 1.0:
        raise DomainError(f"need 1/2 < s <= 1, got {s}")
    chr = _as_character(D)
    primes = sieve_primes(max(2, math.ceil(v))).primes
    mask = (primes > u) & (primes < v)
    p = primes[mask].astype(np.float64)
    c = chr.chi_many(primes[mask]).astype(np.float64)
    val = float(np.sum(c * np.log(p) / p ** s))
    return SmoothedLValue(D=chr.D, s=s, y=0.0, value=val, kind="dirichlet_window", window=(u, v))


# --------------------------------------------------------------------------
# Theta function

@dataclass
class ThetaValue:
    D: int
    t: float
    value: float
    tail_bound: float


def theta(D, t: float, eps: float = 1e-14) -> ThetaValue:
    """theta(t, chi_D) = sum_n chi_D(n) exp(-pi n^2 t / D) for positive D."""
    chr = _as_character(D)
    if chr.D <= 0:
        raise DomainError("theta needs a positive fundamental discriminant")
    if t <= 0:
        raise DomainError(f"need t > 0, got {t}")
    Dv = chr.D
    c = math.pi * t / Dv
    n_max = max(2, math.ceil(math.sqrt((math.log(1.0 / eps) + 5.0) / c)))
    while True:
        r = math.exp(-c * (2 * n_max + 1))
        tail = math.exp(-c * n_max * n_max) * r / (1.0 - r)
        if tail <= eps or tail < 1e-300:
            break
        n_max = int(1.3 * n_max) + 1
    n = np.arange(1, n_max + 1, dtype=np.int64)
    vals = chr.chi_many(n).astype(np.float64)
    value = float(np.sum(vals * np.exp(-c * n.astype(np.float64) ** 2)))
    return ThetaValue(D=Dv, t=t, value=value, tail_bound=tail)


def theta_zero_scan(D, t_range: tuple[float, float], points: int = 512) -> SignChangeReport:
    """Sign changes of theta(t, chi_D) on a log-uniform grid in t, each change
    bracketed and bisected; positions are the bracket midpoints."""
    t_lo, t_hi = t_range
    if not 0 < t_lo < t_hi:
        raise DomainError(f"need 0 < t_lo < t_hi, got {t_range}")
    chr = _as_character(D)
    ts = np.exp(np.linspace(math.log(t_lo), math.log(t_hi), points))

    def certified_sign(t: float) -> int:
        th = theta(chr, t)
        if abs(th.value) <= th.tail_bound + 1e-13 * (1 + abs(th.value)):
            return 0
        return 1 if th.value > 0 else -1

    signs = np.array([certified_sign(float(t)) for t in ts], dtype=np.int8)
    positions: list[float] = []
    for i in range(points - 1):
        if signs[i] * signs[i + 1] < 0:
            lo, hi, s_lo = float(ts[i]), float(ts[i + 1]), int(signs[i])
            while hi - lo > 1e-9 * hi:
                mid = 0.5 * (lo + hi)
                sm = certified_sign(mid)
                if sm == 0:
                    break
                if sm == s_lo:
                    lo = mid
                else:
                    hi = mid
            positions.append(0.5 * (lo + hi))
    return SignChangeReport(
        count=len(positions),
        variant=DELETED_ZEROS,
        positions=positions,
        range=(t_lo, t_hi),
    )


# --------------------------------------------------------------------------
# Identity checks

def _power_moments(chr: QuadraticCharacter, kmax: int) -> list[float]:
    """A_k = sum_{n<q} chi(n) n^k for k = 0..kmax (A_0 = 0)."""
    q = chr.modulus
    n = np.arange(q, dtype=np.float64)
    c = chr.table.astype(np.float64)
    return [float(np.dot(c, n ** k)) for k in range(kmax + 1)]


def _ratio_series(chr: QuadraticCharacter) -> tuple[float, float, float, float]:
    """Taylor coefficients rho_0..rho_3 of F_D(e^-t)/(1 - e^(-qt)) at t = 0.

    Uses t/(1 - e^(-qt)) = (1/q)(1 + qt/2 + (qt)^2/12 + O(t^4)) against the
    expansion F_D(e^-t) = -A_1 t + A_2 t^2/2 - A_3 t^3/6 + A_4 t^4/24 + ...
    """
    q = chr.modulus
    _, a1, a2, a3, a4 = _power_moments(chr, 4)
    g = (-a1, a2 / 2.0, -a3 / 6.0, a4 / 24.0)  # coefficients of g1 = F(e^-t)/t
    h = (1.0, q / 2.0, q * q / 12.0, 0.0)  # q/(1 - e^(-qt)) * t, degree 3
    rho = []
    for k in range(4):
        rho.append(sum(g[i] * h[k - i] for i in range(k + 1)) / q)
    return tuple(rho)


def _fekete_over_denominator(chr: QuadraticCharacter, t: float) -> float:
    """F_D(e^-t) / (1 - e^(-qt)) evaluated directly (t bounded away from 0)."""
    q = chr.modulus
    n_hi = min(q - 1, max(1, math.ceil(42.0 / t)))
    n = np.arange(1, n_hi + 1, dtype=np.float64)
    num = float(np.dot(chr.table[1 : n_hi + 1].astype(np.float64), np.exp(-n * t)))
    return num / -math.expm1(-q * t)


def _quad(f, lo: float, hi: float, quad_tol: float, points=None) -> float:
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            val, abserr = integrate.quad(
                f, lo, hi, epsabs=quad_tol, epsrel=quad_tol, limit=400, points=points
            )
        except integrate.IntegrationWarning as exc:
            raise NumericalError(f"quadrature did not converge: {exc}") from exc
    if not math.isfinite(val):
        raise NumericalError("quadrature returned a non-finite value")
    return val


def verify_dirichlet_identity(D, s: float, quad_tol: float = 1e-10) -> float:
    """Relative residual of Gamma(s) L(s, chi_D) against the Mellin integral
    of F_D(e^-t)/(1 - e^(-|D|t)) for s > 0."""
    if s <= 0:
        raise DomainError(f"need s > 0, got {s}")
    chr = _as_character(D)
    q = chr.modulus
    lhs = float(mp.gamma(s)) * l_value(chr, s)

    t0 = 1e-3 / q
    rho = _ratio_series(chr)
    head = sum(r * t0 ** (s + k) / (s + k) for k, r in enumerate(rho))
    t_max = math.log(1.0 / quad_tol) + 8.0
    body = _quad(
        lambda t: _fekete_over_denominator(chr, t) * t ** (s - 1.0),
        t0,
        t_max,
        quad_tol,
    )
    rhs = head + body
    return abs(lhs - rhs) / (1.0 + abs(lhs))


def fekete_laplace_check(D, s: float, quad_tol: float = 1e-10) -> float:
    """Relative residual of the log-differentiated Mellin identity

    Gamma(s) (L'(s) + L(s) psi(s)) = int_0^inf F_D(e^-t) (1-e^(-|D|t))^-1 t^(s-1) log(t) dt.
    """
    if not 0.5 < s <= 1.0:
        raise DomainError(f"need 1/2 < s <= 1, got {s}")
    chr = _as_character(D)
    q = chr.modulus
    with mp.workdps(MP_DPS):
        lhs = float(
            mp.gamma(s) * (l_derivative(chr, s) + l_value(chr, s) * mp.digamma(s))
        )
    t0 = 1e-3 / q
    rho = _ratio_series(chr)
    head = sum(
        r * t0 ** (s + k) * (math.log(t0) / (s + k) - 1.0 / (s + k) ** 2)
        for k, r in enumerate(rho)
    )
    t_max = math.log(1.0 / quad_tol) + 8.0
    body = _quad(
        lambda t: _fekete_over_denominator(chr, t) * t ** (s - 1.0) * math.log(t),
        t0,
        t_max,
        quad_tol,
        points=[1.0],
    )
    rhs = head + body
    return abs(lhs - rhs) / (1.0 + abs(lhs))


def laplace_identity_check(D, s: float, quad_tol: float = 1e-10) -> float:
    """Relative residual of
    (L(s)/s)(-L'/L(s) + 1/s) = int_0^inf t S_chi(e^t) e^(-st) dt.

    The right side is integrated piecewise exactly: on [log N, log(N+1)) the
    integrand is S(N) t e^(-st) with antiderivative -(t/s + 1/s^2) e^(-st),
    summed for N below a whole number of periods; the remaining tail is a
    finite combination of Hurwitz zeta values (S is |D|-periodic), evaluated
    exactly.
    """
    if not 0.5 < s <= 1.0:
        raise DomainError(f"need 1/2 < s <= 1, got {s}")
    chr = _as_character(D)
    q = chr.modulus
    lhs = (-l_derivative(chr, s) + l_value(chr, s) / s) / s

    K = max(2, math.ceil(1000 / q))
    N0 = K * q
    per = chr.period_prefix()  # S(r), r = 0..q-1
    N = np.arange(1, N0 + 1, dtype=np.float64)
    f = N ** (-s) * (np.log(N) / s + 1.0 / (s * s))
    S = per[np.arange(1, N0 + 1) % q].astype(np.float64)
    finite = float(np.dot(S[: N0 - 1], f[: N0 - 1] - f[1:]))  # N = 1 .. N0-1

    # Summation by parts turns the tail sum_{N >= N0} S(N)(f(N) - f(N+1))
    # into sum_{a=N0+1}^{N0+q-1} chi(a) G(a) with G(a) = sum_j f(a + jq); the
    # mean-zero chi coefficients cancel the Hurwitz poles, so the tail is an
    # entire function of s and can be averaged across the s = 1 singularity.
    if s == 1.0:
        h = 1e-8
        tail = 0.5 * (_laplace_tail(chr, s + h, N0, dps=45) + _laplace_tail(chr, s - h, N0, dps=45))
    else:
        tail = _laplace_tail(chr, s, N0, dps=MP_DPS)
    rhs = finite + tail
    return abs(lhs - rhs) / (1.0 + abs(lhs))


def _laplace_tail(chr: QuadraticCharacter, s: float, N0: int, dps: int) -> float:
    q = chr.modulus
    tbl = chr.table
    with mp.workdps(dps):
        ms = mp.mpf(s)
        logq = mp.log(q)
        qs = mp.power(q, -ms)

        def G(a: int):
            aq = mp.mpf(a) / q
            z0 = mp.zeta(ms, aq)
            z1 = mp.zeta(ms, aq, 1)
            return qs * ((logq * z0 - z1) / ms + z0 / (ms * ms))

        total = mp.fsum(
            int(tbl[a % q]) * G(a)
            for a in range(N0 + 1, N0 + q)
            if tbl[a % q]
        )
        return float(total)


def _theta_gauss(chr: QuadraticCharacter, t: float) -> float:
    """sum_{n>=1} chi(n) e^(-n^2 t); this is theta(tD/pi, chi_D)."""
    n_max = max(2, math.ceil(math.sqrt(42.0 / t)))
    n = np.arange(1, n_max + 1, dtype=np.float64)
    c = chr.chi_many(np.arange(1, n_max + 1)).astype(np.float64)
    return float(np.dot(c, np.exp(-(n * n) * t)))


def mellin_theta_check(D, s: float, quad_tol: float = 1e-10) -> float:
    """Relative residual of the log-differentiated theta-Mellin identity.

    Since Gamma(s/2) L(s) = int_0^inf theta(tD/pi, chi_D) t^(s/2 - 1) dt
    exactly (the substituted weights are e^(-n^2 t)), differentiating in s
    brings down (1/2) log t, so

        2 Gamma(s/2) (L'(s) + L(s) psi(s/2)/2)
            = int_0^inf theta(tD/pi, chi_D) t^(s/2-1) log(t) dt.
    """
    if not 0.0 < s <= 1.0:
        raise DomainError(f"need 0 < s <= 1, got {s}")
    chr = _as_character(D)
    if chr.D <= 0:
        raise DomainError("theta identities need a positive discriminant")
    Dv = chr.D
    with mp.workdps(MP_DPS):
        lhs = float(
            2
            * mp.gamma(s / 2)
            * (l_derivative(chr, s) + l_value(chr, s) * mp.digamma(s / 2) / 2)
        )
    L0 = math.log(1.0 / quad_tol) + 3.0 * math.log(Dv) + 20.0
    t_lo = math.pi ** 2 / (Dv * Dv * L0) / 50.0
    t_max = math.log(1.0 / quad_tol) + 12.0
    rhs = _quad(
        lambda t: _theta_gauss(chr, t) * t ** (s / 2.0 - 1.0) * math.log(t),
        t_lo,
        t_max,
        quad_tol,
        points=[1.0],
    )
    return abs(lhs - rhs) / (1.0 + abs(lhs))


def mellin_theta_base_residual(D, s: float, quad_tol: float = 1e-10) -> float:
    """Relative residual of Gamma(s/2) L(s) = int theta(tD/pi) t^(s/2-1) dt,
    the undifferentiated normalization check."""
    if not 0.0 < s <= 1.0:
        raise DomainError(f"need 0 < s <= 1, got {s}")
    chr = _as_character(D)
    if chr.D <= 0:
        raise DomainError("theta identities need a positive discriminant")
    Dv = chr.D
    lhs = float(mp.gamma(s / 2)) * l_value(chr, s)
    L0 = math.log(1.0 / quad_tol) + 3.0 * math.log(Dv) + 20.0
    t_lo = math.pi ** 2 / (Dv * Dv * L0) / 50.0
    t_max = math.log(1.0 / quad_tol) + 12.0
    rhs = _quad(
        lambda t: _theta_gauss(chr, t) * t ** (s / 2.0 - 1.0), t_lo, t_max, quad_tol
    )
    return abs(lhs - rhs) / (1.0 + abs(lhs))


# --------------------------------------------------------------------------
# Karlin-type sign-change comparison

@dataclass
class PiecewiseFunction:
    """Piecewise-linear function with possible jumps: g(x) = a + b x on
    [x_lo, x_hi), given as pieces (x_lo, x_hi, a, b); zero elsewhere."""

    pieces: list[tuple[float, float, float, float]] = field(default_factory=list)

    @classmethod
    def from_step(cls, breaks, values) -> "PiecewiseFunction":
        if len(breaks) != len(values) + 1:
            raise DomainError("need len(breaks) == len(values) + 1")
        return cls([(breaks[i], breaks[i + 1], float(values[i]), 0.0) for i in range(len(values))])

    @classmethod
    def from_nodes(cls, xs, ys) -> "PiecewiseFunction":
        if len(xs) != len(ys) or len(xs) < 2:
            raise DomainError("need matching xs/ys with at least two nodes")
        pieces = []
        for i in range(len(xs) - 1):
            b = (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i])
            a = ys[i] - b * xs[i]
            pieces.append((xs[i], xs[i + 1], a, b))
        return cls(pieces)

    @classmethod
    def from_partial_sum_trace(cls, chr: QuadraticCharacter, upto: int) -> "PiecewiseFunction":
        """t * S_chi(e^t) on [0, log(upto)): slope S(N) on [log N, log(N+1))."""
        from .character import partial_sums

        S = partial_sums(chr, upto)
        pieces = []
        for N in range(1, upto):
            pieces.append((math.log(N), math.log(N + 1), 0.0, float(S[N - 1])))
        return cls(pieces)

    def endpoint_values(self) -> np.ndarray:
        out = []
        for lo, hi, a, b in self.pieces:
            out.append(a + b * lo)
            out.append(a + b * hi)
        return np.array(out)

    def sign_changes_deleted(self) -> int:
        """Exact S^- of the function: within a linear piece values sweep the
        segment between its endpoint values, so endpoint signs capture every
        change."""
        return sign_changes(self.endpoint_values(), DELETED_ZEROS).count

    def laplace(self, s: float) -> float:
        """Exact Laplace transform int g(x) e^(-sx) dx (closed form per piece)."""
        total = 0.0
        for lo, hi, a, b in self.pieces:
            e_lo, e_hi = math.exp(-s * lo), math.exp(-s * hi)
            total += a * (e_lo - e_hi) / s
            total += b * (e_lo * (lo / s + 1.0 / s ** 2) - e_hi * (hi / s + 1.0 / s ** 2))
        return total


def karlin_check(g: PiecewiseFunction, s_grid) -> tuple[int, int]:
    """(S^-(g), S^+(Laplace g on s_grid)); any valid transform grid gives a
    lower bound for S^+ over (0, inf), so S^-(g) >= the returned S^+ must hold."""
    s_grid = np.asarray(s_grid, dtype=np.float64)
    if len(s_grid) == 0 or np.any(s_grid <= 0):
        raise DomainError("s_grid must be positive and nonempty")
    lv = np.array([g.laplace(float(s)) for s in s_grid])
    s_minus = g.sign_changes_deleted()
    s_plus = sign_changes(lv, "max_over_zeros").count
    # a grid S^+ can only undercount the transform's true S^+, so this can
    # fail only on an implementation bug, never on an unlucky grid
    assert s_minus >= s_plus, (s_minus, s_plus)
    return s_minus, s_plus
