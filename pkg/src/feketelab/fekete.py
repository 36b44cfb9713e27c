"""Fekete polynomials F_D(z) = sum_{n=1}^{|D|-1} chi_D(n) z^n on (0, 1).

Three evaluation routes (direct, geometric-tail truncation, Poisson dual for
positive D) carry explicit error bounds, and real zeros are counted either by
sign changes on a grid geometrically clustered toward z = 1, or exactly by
integer-arithmetic root isolation for moderate degrees.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from sympy.polys.domains import QQ, ZZ
from sympy.polys.densetools import dup_eval
from sympy.polys.rootisolation import dup_isolate_real_roots

from .character import QuadraticCharacter, chi_table
from .errors import CapabilityError, DomainError

_EPS = np.finfo(np.float64).eps
_CHUNK = 1 << 18

STURM_DEGREE_CAP = 500
BEK_CONSTANT = 8.0

GRID_BISECTION = "grid_bisection"
STURM_EXACT = "sturm_exact"
JENSEN_UPPER = "jensen_upper"


@dataclass
class FeketeEval:
    D: int
    z: float
    value: float
    method: str
    error_bound: float


@dataclass
class ZeroCountReport:
    interval: tuple[float, float]
    method: str
    count: int
    brackets: list[tuple[float, float]]
    grid_points: int = 0
    note: str = ""


def _table(D) -> np.ndarray:
    if isinstance(D, QuadraticCharacter):
        if D.table is None:
            raise DomainError("evaluation needs the cached character table")
        return D.table
    return chi_table(int(D))


def _D_value(D) -> int:
    return D.D if isinstance(D, QuadraticCharacter) else int(D)


def _sum_terms(tbl: np.ndarray, z: float, n_hi: int) -> tuple[float, float]:
    """sum_{n=1}^{n_hi} chi(n) z^n and a bound on the accumulated float error."""
    total = 0.0
    abs_total = 0.0
    for lo in range(1, n_hi + 1, _CHUNK):
        hi = min(lo + _CHUNK - 1, n_hi)
        n = np.arange(lo, hi + 1, dtype=np.float64)
        terms = tbl[lo : hi + 1].astype(np.float64) * np.power(z, n)
        total += float(np.sum(terms))
        abs_total += float(np.sum(np.abs(terms)))
    return total, 8.0 * _EPS * (abs_total + abs(total))


def eval_direct(D, z: float) -> FeketeEval:
    """Full-length evaluation; error bound is at machine scale."""
    if not 0.0 <= z < 1.0:
        raise DomainError(f"z must lie in [0, 1), got {z}")
    tbl = _table(D)
    q = len(tbl)
    value, ferr = _sum_terms(tbl, z, q - 1)
    return FeketeEval(D=_D_value(D), z=z, value=value, method="direct", error_bound=ferr)


def eval_truncated(D, z: float, tail_eps: float) -> FeketeEval:
    """Truncate when the geometric tail z^(N+1)/(1-z) drops below tail_eps."""
    if tail_eps <= 0:
        raise DomainError(f"tail_eps must be > 0, got {tail_eps}")
    if not 0.0 <= z < 1.0:
        raise DomainError(f"z must lie in [0, 1), got {z}")
    tbl = _table(D)
    q = len(tbl)
    if z == 0.0:
        return FeketeEval(D=_D_value(D), z=z, value=0.0, method="truncated", error_bound=0.0)
    n_star = math.ceil(math.log(tail_eps * (1.0 - z)) / math.log(z)) - 1
    n_star = max(1, n_star)
    if n_star >= q - 1:
        value, ferr = _sum_terms(tbl, z, q - 1)
        return FeketeEval(D=_D_value(D), z=z, value=value, method="truncated", error_bound=ferr)
    value, ferr = _sum_terms(tbl, z, n_star)
    tail = z ** (n_star + 1) / (1.0 - z)
    return FeketeEval(
        D=_D_value(D), z=z, value=value, method="truncated", error_bound=tail + ferr
    )


def eval_poisson_dual(D, T: float, precision: float = 1e-10) -> FeketeEval:
    """Dual-sum evaluation of F_D(exp(-T/D)) for positive D.

    Splitting the defining sum symmetrically (chi_D is even for D > 0) and
    applying Poisson summation turns F_D(e^(-T/D)) into
    (2 sqrt(D)/T) * sum_n chi_D(n) / (1 + 4 pi^2 (n/T)^2) up to the wing of
    the full bilateral sum beyond |n| >= D, which is at most
    e^(-T)/(1 - e^(-T/D)).  The dual tail beyond the cutoff is bounded by
    summation by parts against the exact maximum |S_chi| over one period.
    """
    Dv = _D_value(D)
    if Dv < 0:
        raise DomainError("the dual formula needs a positive (even-character) D")
    if not 1.0 <= T <= Dv:
        raise DomainError(f"T must lie in [1, D], got T={T}, D={Dv}")
    tbl = _table(D)
    q = len(tbl)
    z = math.exp(-T / Dv)
    prefactor = 2.0 * math.sqrt(Dv) / T
    n_star = math.ceil(math.sqrt(math.sqrt(Dv) * T / (2.0 * math.pi ** 2 * precision)))
    total = 0.0
    abs_total = 0.0
    for lo in range(1, n_star + 1, _CHUNK):
        hi = min(lo + _CHUNK - 1, n_star)
        n = np.arange(lo, hi + 1, dtype=np.int64)
        g = 1.0 / (1.0 + 4.0 * math.pi ** 2 * (n / T) ** 2)
        terms = tbl[n % q].astype(np.float64) * g
        total += float(np.sum(terms))
        abs_total += float(np.sum(g))
    value = prefactor * total

    wing = math.exp(-T) / -math.expm1(-T / Dv)
    prefix = np.cumsum(tbl, dtype=np.int64)
    B = float(np.max(np.abs(prefix)))
    g_next = 1.0 / (1.0 + 4.0 * math.pi ** 2 * ((n_star + 1) / T) ** 2)
    dual_tail = prefactor * 2.0 * B * g_next
    ferr = 8.0 * _EPS * prefactor * (abs_total + abs(total))
    return FeketeEval(
        D=Dv,
        z=z,
        value=value,
        method="poisson_dual",
        error_bound=wing + dual_tail + ferr,
    )


def _certified_sign(fe: FeketeEval) -> int:
    if abs(fe.value) <= fe.error_bound:
        return 0
    return 1 if fe.value > 0 else -1


class GridEvaluator:
    """Truncated evaluation of F_D at a fixed set of points, with the power
    ladders z^1..z^N precomputed once; the per-point cutoff N depends only on
    (z, tail_eps), so one evaluator serves every discriminant in a sweep."""

    def __init__(self, zs: np.ndarray, tail_eps: float):
        self.zs = np.asarray(zs, dtype=np.float64)
        self.tail_eps = tail_eps
        self.cutoffs = []
        self.powers = []
        for z in self.zs:
            z = float(z)
            if z == 0.0:
                self.cutoffs.append(0)
                self.powers.append(np.empty(0))
                continue
            n_star = max(1, math.ceil(math.log(tail_eps * (1.0 - z)) / math.log(z)) - 1)
            self.cutoffs.append(n_star)
            self.powers.append(np.cumprod(np.full(n_star, z)))

    def evaluate(self, tbl: np.ndarray):
        """(values, error_bounds) for the polynomial with coefficient table tbl."""
        q = len(tbl)
        c = tbl.astype(np.float64)
        values = np.zeros(len(self.zs))
        errors = np.zeros(len(self.zs))
        for i, z in enumerate(self.zs):
            n_star = self.cutoffs[i]
            if n_star == 0:
                continue
            tail = 0.0
            if n_star >= q - 1:
                n_star = q - 1
            else:
                tail = float(z) ** (n_star + 1) / (1.0 - float(z))
            values[i] = float(np.dot(c[1 : n_star + 1], self.powers[i][:n_star]))
            s_abs = min(n_star, z / (1.0 - z))
            errors[i] = tail + _EPS * (8.0 * s_abs + z / (1.0 - z) ** 2)
        return values, errors


def _grid_evaluator(a: float, b: float, points: int, tail_eps: float) -> GridEvaluator:
    key = (a, b, points, tail_eps)
    ev = _GRID_CACHE.get(key)
    if ev is None:
        u = np.linspace(-math.log1p(-a), -math.log1p(-b), points)
        ev = GridEvaluator(1.0 - np.exp(-u), tail_eps)
        if len(_GRID_CACHE) > 8:
            _GRID_CACHE.clear()
        _GRID_CACHE[key] = ev
    return ev


_GRID_CACHE: dict = {}


def eval_grid_truncated(tbl: np.ndarray, zs: np.ndarray, tail_eps: float):
    """Truncated evaluation at many points; returns (values, error_bounds)."""
    return GridEvaluator(zs, tail_eps).evaluate(tbl)


def count_zeros_grid(
    D,
    interval: tuple[float, float],
    points: int = 10_000,
    refine_tol: float = 1e-12,
    tail_eps: float = 1e-13,
) -> ZeroCountReport:
    """Certified lower bound for the zero count via sign changes on a grid
    uniform in u = -log(1-z), so points cluster geometrically toward z = 1.

    Only odd-order zeros are detectable; values within the evaluation error
    of zero are treated as sign 0 and never counted.
    """
    a, b = interval
    if not (0.0 <= a <= b < 1.0):
        raise DomainError(f"need 0 <= a <= b < 1, got {interval}")
    if points < 2:
        raise DomainError("need at least 2 grid points")
    Dv = _D_value(D)
    if a == b:
        return ZeroCountReport((a, b), GRID_BISECTION, 0, [], grid_points=0)
    chr = D if isinstance(D, QuadraticCharacter) else QuadraticCharacter(Dv)

    ev = _grid_evaluator(a, b, points, tail_eps)
    zs = ev.zs
    vals, errs = ev.evaluate(_table(chr))
    signs = np.where(np.abs(vals) <= errs, 0, np.sign(vals)).astype(np.int8)

    brackets: list[tuple[float, float]] = []
    for i in range(points - 1):
        if signs[i] * signs[i + 1] < 0:
            lo, hi = float(zs[i]), float(zs[i + 1])
            s_lo = int(signs[i])
            while hi - lo > refine_tol:
                mid = 0.5 * (lo + hi)
                s_mid = _certified_sign(eval_truncated(chr, mid, tail_eps))
                if s_mid == 0:
                    break
                if s_mid == s_lo:
                    lo = mid
                else:
                    hi = mid
            brackets.append((lo, hi))
    return ZeroCountReport(
        (a, b), GRID_BISECTION, len(brackets), brackets, grid_points=points
    )


def _to_fraction(x) -> Fraction:
    if isinstance(x, float):
        return Fraction(repr(x))
    return Fraction(x)


def _as_qq(x: Fraction):
    return QQ(x.numerator, x.denominator)


def count_zeros_sturm(
    D, interval: tuple, degree_cap: int = STURM_DEGREE_CAP
) -> ZeroCountReport:
    """Exact count of distinct real zeros of F_D in the open interval (a, b).

    Uses exact integer-arithmetic real-root isolation, which is far faster
    than Sturm chains at these degrees while returning the same count.  The
    known root z = 0 is divided out first, so intervals with an endpoint at
    0 behave correctly; roots exactly on a or b are excluded.
    """
    Dv = _D_value(D)
    q = abs(Dv)
    if q - 1 > degree_cap:
        raise CapabilityError(
            f"degree {q - 1} exceeds cap {degree_cap}; use count_zeros_grid"
        )
    a, b = (_to_fraction(interval[0]), _to_fraction(interval[1]))
    if a >= b:
        return ZeroCountReport((float(a), float(b)), STURM_EXACT, 0, [])
    tbl = _table(D)
    # G(z) = F_D(z)/z, descending coefficients chi(q-1) ... chi(1)
    g = [ZZ(int(c)) for c in tbl[:0:-1]]
    qa, qb = _as_qq(a), _as_qq(b)
    endpoint_roots = int(dup_eval(g, qa, QQ) == 0) + int(dup_eval(g, qb, QQ) == 0)
    iso = dup_isolate_real_roots(g, ZZ, inf=qa, sup=qb)

    brackets = []
    interior = 0
    for (u, v), _mult in iso:
        if u == v:
            # exact rational roots are returned as degenerate intervals
            if qa < u < qb:
                interior += 1
                brackets.append((float(u), float(v)))
            continue
        # non-degenerate isolating intervals hold their root strictly inside
        # (u, v) subset [a, b]; a neighboring root may sit exactly on u or v.
        interior += 1
        brackets.append((float(u), float(v)))
    # 0 is a root of F but never of G; count zeros of F in (a,b) = zeros of G
    # in (a,b) plus the origin if it lies strictly inside.
    count = interior + (1 if a < 0 < b else 0)
    note = f"{endpoint_roots} root(s) on the boundary excluded" if endpoint_roots else ""
    return ZeroCountReport((float(a), float(b)), STURM_EXACT, count, brackets, note=note)


def jensen_upper_bound(D, z0: float, r: float, R: float, f_z0: float) -> int:
    """Upper bound for the number of zeros of F_D in the disc |z - z0| <= r.

    The circle max is bounded rigorously by sum_(n<q) (z0+R)^n; the quotient
    log(max/|F(z0)|) / log(R/r) bounds the zero count inside radius r, hence
    the real zeros in (z0-r, z0+r).
    """
    if not 0 < r < R:
        raise DomainError(f"need 0 < r < R, got r={r}, R={R}")
    if r / R > 0.999:
        raise DomainError("r/R too close to 1; the bound diverges")
    if f_z0 <= 0:
        raise DomainError("need |F(z0)| > 0")
    q = abs(_D_value(D))
    rho = z0 + R
    if rho <= 0:
        raise DomainError("circle lies in z <= 0")
    if abs(rho - 1.0) < 1e-15:
        log_max = math.log(q - 1)
    elif rho < 1.0:
        log_max = math.log(rho * (1.0 - rho ** (q - 1)) / (1.0 - rho))
    else:
        t = (q - 1) * math.log(rho)
        if t < 600.0:
            log_max = math.log(rho * (rho ** (q - 1) - 1.0) / (rho - 1.0))
        else:
            log_max = q * math.log(rho) - math.log(rho - 1.0)
    bound = (log_max - math.log(f_z0)) / (math.log(R) - math.log(r))
    return max(0, math.ceil(bound))


def bek_bound(a: float, c: float = BEK_CONSTANT) -> int:
    """ceil(c/a): sanity comparator for zero counts on (-1+a, 1-a).

    The underlying absolute constant for unit-coefficient polynomials is not
    pinned down, so c is configuration, never a certified bound.
    """
    if not 0.0 < a < 1.0:
        raise DomainError(f"need a in (0, 1), got {a}")
    return math.ceil(c / a)
