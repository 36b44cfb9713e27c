"""Quadratic characters chi_D, their partial sums, and sign-change counting.

Sign changes of a real sequence come in two flavors:

- ``deleted_zeros``  : delete zero terms, count adjacent sign flips (S^-)
- ``max_over_zeros`` : replace each zero by a sign of our choice so as to
  maximize the number of adjacent flips (S^+), computed exactly by dynamic
  programming over the replacement choices.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .arith import Discriminant, factor_with_table, is_fundamental, kronecker
from .errors import DomainError

# Period tables above this many entries are not cached; chi falls back to
# per-call Kronecker symbols.
CACHE_LIMIT = 10 ** 7

DELETED_ZEROS = "deleted_zeros"
MAX_OVER_ZEROS = "max_over_zeros"


def legendre_table(p: int) -> np.ndarray:
    """Values (n|p) for n = 0..p-1, via the set of nonzero squares mod p."""
    sq = np.zeros(p, dtype=bool)
    r = np.arange(1, p, dtype=np.int64)
    sq[(r * r) % p] = True
    t = np.where(sq, np.int8(1), np.int8(-1))
    t[0] = 0
    return t


def _two_part_table(E: int) -> np.ndarray:
    """chi_E for the power-of-two prime discriminants E in {-4, 8, -8}."""
    if E == -4:
        vals = [0, 1, 0, -1]
    elif E == 8:
        vals = [0, 1, 0, -1, 0, -1, 0, 1]
    elif E == -8:
        vals = [0, 1, 0, 1, 0, -1, 0, -1]
    else:
        raise DomainError(f"not a two-part prime discriminant: {E}")
    return np.array(vals, dtype=np.int8)


def chi_table(D: int) -> np.ndarray:
    """Full period table chi_D(n) for n = 0..|D|-1.

    Built from the factorization of D into prime discriminants: every odd
    prime p | D contributes p* = (-1)^((p-1)/2) p with chi_{p*}(n) = (n|p),
    and the quotient E = D / prod(p*) lies in {1, -4, 8, -8}.
    """
    if not is_fundamental(D):
        raise DomainError(f"D = {D} is not a fundamental discriminant")
    q = abs(D)
    if q == 1:
        return np.array([1], dtype=np.int8)
    n = np.arange(q, dtype=np.int64)
    t = np.ones(q, dtype=np.int8)
    P = 1
    for p, _ in factor_with_table(q):
        if p == 2:
            continue
        t *= legendre_table(p)[n % p]
        P *= p if p % 4 == 1 else -p
    E = D // P
    if E != 1:
        t *= _two_part_table(E)[n % 8 if abs(E) == 8 else n % 4]
    return t


@dataclass
class QuadraticCharacter:
    """chi_D for a fundamental discriminant, with an optional cached period table.

    Immutable in practice: the table is built eagerly at construction and
    never mutated, so instances are safe to share across threads.
    """

    disc: Discriminant
    modulus: int = field(init=False)
    table: np.ndarray | None = field(init=False, default=None, repr=False)

    def __init__(self, D: int | Discriminant, cache_limit: int = CACHE_LIMIT):
        value = D.value if isinstance(D, Discriminant) else int(D)
        if not is_fundamental(value):
            raise DomainError(f"D = {value} is not a fundamental discriminant")
        self.disc = Discriminant(value, True)
        self.modulus = abs(value)
        self.table = chi_table(value) if self.modulus <= cache_limit else None

    @property
    def D(self) -> int:
        return self.disc.value

    def chi(self, n: int) -> int:
        if self.table is not None:
            return int(self.table[n % self.modulus])
        return kronecker(self.D, n)

    def chi_many(self, n: np.ndarray) -> np.ndarray:
        n = np.asarray(n, dtype=np.int64)
        if self.table is not None:
            return self.table[n % self.modulus]
        return np.array([kronecker(self.D, int(v)) for v in n], dtype=np.int8)

    def period_prefix(self) -> np.ndarray:
        """S(r) for r = 0..|D|-1; S is |D|-periodic because the period sums to 0."""
        if self.table is None:
            raise DomainError("period prefix needs the cached table")
        return np.cumsum(self.table, dtype=np.int64)


def chi(chr: QuadraticCharacter, n: int) -> int:
    return chr.chi(n)


def partial_sums(chr: QuadraticCharacter, N_max: int) -> np.ndarray:
    """S(N) = sum_{n<=N} chi_D(n) for N = 1..N_max."""
    if N_max < 1:
        raise DomainError(f"N_max must be >= 1, got {N_max}")
    q = chr.modulus
    if chr.table is not None:
        per = chr.period_prefix()
        if N_max < q:
            return per[1 : N_max + 1].copy()
        idx = np.arange(1, N_max + 1, dtype=np.int64) % q
        return per[idx]
    vals = chr.chi_many(np.arange(1, N_max + 1))
    return np.cumsum(vals, dtype=np.int64)


@dataclass
class SignChangeReport:
    count: int
    variant: str
    positions: list[int]
    range: tuple[int, int]
    degenerate: bool = False


def _flips_deleted(values: np.ndarray) -> tuple[int, list[int]]:
    s = np.sign(values)
    nz = np.flatnonzero(s)
    if len(nz) < 2:
        return 0, []
    sn = s[nz]
    flip_at = np.flatnonzero(sn[1:] * sn[:-1] < 0)
    return int(len(flip_at)), [int(nz[i + 1]) for i in flip_at]


def _flips_max_over_zeros(values: np.ndarray) -> tuple[int, list[int]]:
    """Exact S^+ by dynamic programming over the sign assigned to each zero."""
    s = np.sign(values).astype(np.int64)
    NEG = -(10 ** 9)
    # dp[sigma] = best flip count so far with current element assigned sigma
    allowed0 = (1, -1) if s[0] == 0 else (int(s[0]),)
    dp = {1: 0 if 1 in allowed0 else NEG, -1: 0 if -1 in allowed0 else NEG}
    parents: list[dict[int, int]] = [{1: 0, -1: 0}]
    for v in s[1:]:
        allowed = (1, -1) if v == 0 else (int(v),)
        new = {1: NEG, -1: NEG}
        par = {1: 0, -1: 0}
        for sig in allowed:
            # prefer the +1 predecessor on ties, for a deterministic backtrack
            best, best_from = NEG, 0
            for prev in (1, -1):
                cand = dp[prev] + (1 if prev != sig else 0)
                if cand > best:
                    best, best_from = cand, prev
            new[sig], par[sig] = best, best_from
        dp = new
        parents.append(par)
    count = max(dp.values())
    # backtrack one optimal assignment to report flip positions
    sig = 1 if dp[1] >= dp[-1] else -1
    assign = [sig]
    for par in reversed(parents[1:]):
        sig = par[sig]
        assign.append(sig)
    assign.reverse()
    positions = [i for i in range(1, len(assign)) if assign[i] != assign[i - 1]]
    assert len(positions) == count
    return int(count), positions


def sign_changes(values, variant: str = DELETED_ZEROS) -> SignChangeReport:
    """Count sign changes of a real sequence under the chosen zero treatment."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1 or len(arr) == 0:
        raise DomainError("sign_changes needs a nonempty 1-d sequence")
    if variant == DELETED_ZEROS:
        count, pos = _flips_deleted(arr)
    elif variant == MAX_OVER_ZEROS:
        count, pos = _flips_max_over_zeros(arr)
    else:
        raise DomainError(f"unknown variant {variant!r}")
    return SignChangeReport(
        count=count, variant=variant, positions=pos, range=(0, len(arr) - 1)
    )


def window_bounds(D: int, alpha: float) -> tuple[int, int]:
    """Index window [e^((log|D|)^(alpha/100)), e^((log|D|)^alpha)], rounded
    and clipped into [1, |D|-1]."""
    q = abs(D)
    logq = math.log(q)
    lo = round(math.exp(logq ** (alpha / 100.0)))
    hi = round(math.exp(logq ** alpha))
    lo = min(max(lo, 1), q - 1)
    hi = min(max(hi, 1), q - 1)
    return lo, hi


def sign_changes_in_window(chr: QuadraticCharacter, alpha: float) -> SignChangeReport:
    """S^- of the partial-sum trace restricted to the alpha window.

    A window that collapses after clipping (tiny |D|) is reported as a
    degenerate empty-window result rather than an error.
    """
    if not 0 < alpha < 0.05:
        raise DomainError(f"alpha must lie in (0, 1/20), got {alpha}")
    lo, hi = window_bounds(chr.D, alpha)
    if lo >= hi:
        return SignChangeReport(
            count=0, variant=DELETED_ZEROS, positions=[], range=(lo, hi), degenerate=True
        )
    trace = partial_sums(chr, hi)[lo - 1 :]
    rep = sign_changes(trace, DELETED_ZEROS)
    return SignChangeReport(
        count=rep.count,
        variant=DELETED_ZEROS,
        positions=[p + lo for p in rep.positions],
        range=(lo, hi),
    )


def legendre_trace(p: int) -> np.ndarray:
    """Partial sums of the Legendre symbol (n|p), N = 1..p-1.

    Used to reproduce positivity plots for prime moduli like 7727 that are
    not themselves fundamental discriminants (the trace coincides with the
    one for the fundamental discriminant of the quadratic field of
    conductor p).
    """
    if p < 3 or p % 2 == 0:
        raise DomainError("legendre_trace needs an odd prime")
    for d in range(3, math.isqrt(p) + 1, 2):
        if p % d == 0:
            raise DomainError(f"{p} is not prime (divisible by {d})")
    t = legendre_table(p).astype(np.int64)
    return np.cumsum(t[1:])
