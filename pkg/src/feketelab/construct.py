"""Discriminants D = q1 q2 whose characters are +1 on a whole initial segment,
and positivity certificates for their Fekete polynomials away from z = 1.

Two primes q1 < q2, both 1 (mod 8), with equal Legendre vectors over the odd
primes p <= y give a fundamental discriminant D = q1 q2 with chi_D(n) = 1 for
all n <= y (quadratic reciprocity squares the matching residues).  Such a
polynomial has no zeros in (0, 1 - y^(-sqrt(e)+eps)): smooth-number positivity
of the partial sums pushes the zero-free region well beyond z = 1 - 1/y.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .arith import is_fundamental, kronecker, sieve_primes
from .character import chi_table
from .errors import DomainError
from .fekete import GRID_BISECTION, ZeroCountReport, count_zeros_grid

SQRT_E = math.sqrt(math.e)
# k(z) = floor(-A / log z) + 1 in the upper certificate regime; A large enough
# that the geometric tail z^(k+1)/(1-z) is dominated (checked numerically
# per certificate, never assumed).
UPPER_REGIME_A = 10.0


@dataclass
class PositivePair:
    q1: int
    q2: int
    D: int
    y: float
    residue_vector: tuple[int, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if not is_fundamental(self.D):
            raise DomainError(f"D = {self.D} is not fundamental")


def _verify_all_ones(D: int, y: float) -> int | None:
    """Return the smallest n <= y with chi_D(n) != 1, or None if all are 1."""
    for n in range(2, math.floor(y) + 1):
        if kronecker(D, n) != 1:
            return n
    return None


def find_positive_pairs(
    x: int, y: float, limit_count: int | None = None, wide: bool = False
) -> list[PositivePair]:
    """Pairs q1 < q2 of primes = 1 (mod 8) with matching Legendre vectors over
    the odd primes <= y, giving D = q1 q2 <= x with chi_D(n) = 1 for n <= y.

    The default prime window is (x^(1/3), x^(1/2)); ``wide`` searches all
    y < q <= x^(1/2), which finds small certified examples.
    """
    if y < 2:
        raise DomainError(f"need y >= 2, got {y}")
    if x < 100:
        raise DomainError(f"need x >= 100, got {x}")
    lo = y if wide else x ** (1.0 / 3.0)
    hi = math.isqrt(x)
    primes = sieve_primes(max(hi, 3)).primes
    qs = [int(p) for p in primes if lo < p <= hi and p % 8 == 1]
    odd_small = [int(p) for p in sieve_primes(max(3, math.floor(y))).primes if p % 2 == 1 and p <= y]

    buckets: dict[tuple[int, ...], list[int]] = {}
    for q in qs:
        key = tuple(kronecker(p, q) for p in odd_small)
        buckets.setdefault(key, []).append(q)

    pairs = []
    for key, members in buckets.items():
        for i in range(len(members)):
            for j in range(i + 1, len(members)):
                q1, q2 = members[i], members[j]
                D = q1 * q2
                if D > x:
                    continue
                bad = _verify_all_ones(D, y)
                if bad is not None:
                    raise AssertionError(
                        f"construction broke: chi_{D}({bad}) != 1"
                    )
                pairs.append(PositivePair(q1=q1, q2=q2, D=D, y=y, residue_vector=key))
    pairs.sort(key=lambda p: (p.D, p.q1))
    if limit_count is not None:
        pairs = pairs[:limit_count]
    return pairs


def positive_pair_lower_bound(x: int, y: float) -> float:
    """(1/4) x / (2^pi(y) (log x)^2), the density target for the construction."""
    n_primes = len([p for p in sieve_primes(max(2, math.floor(y))).primes if p <= y])
    return 0.25 * x / (2 ** n_primes * math.log(x) ** 2)


def vinogradov_check(
    D: int, y: float, t_max: int | None = None, eps: float = 0.1
) -> float:
    """min over t <= t_max of S_chi_D(t)/t, for D with chi_D = 1 up to y.

    Smooth-number positivity keeps the ratio bounded away from 0 for
    t <= y^(sqrt(e) - eps/2); the returned minimum is expected positive.
    """
    bad = _verify_all_ones(D, y)
    if bad is not None:
        raise DomainError(f"chi_{D}({bad}) != 1; the positivity window needs chi = 1 up to y")
    if t_max is None:
        t_max = math.floor(y ** (SQRT_E - eps / 2.0))
    t_max = min(t_max, abs(D) - 1)
    if t_max < 1:
        raise DomainError("empty check range")
    tbl = chi_table(D)
    vals = tbl[np.arange(1, t_max + 1) % abs(D)].astype(np.int64)
    S = np.cumsum(vals)
    t = np.arange(1, t_max + 1, dtype=np.float64)
    return float(np.min(S / t))


def _certify_piece(tbl: np.ndarray, k: int, z_lo: float, z_hi: float, step: float) -> float | None:
    """Check sum_{n<=k} chi(n) z^n - z^(k+1)/(1-z) > 0 on [z_lo, z_hi].

    Evaluates on a grid and subtracts a derivative (Lipschitz) bound times
    half the spacing, so success certifies the whole piece.  Returns a
    counterexample z on failure, None on success.
    """
    n = np.arange(1, k + 1, dtype=np.float64)
    c = tbl[1 : k + 1].astype(np.float64)
    count = max(3, int(math.ceil((z_hi - z_lo) / step)) + 1)
    zs = np.linspace(z_lo, z_hi, count)
    h = (z_hi - z_lo) / (count - 1) if count > 1 else 0.0
    pw = zs[:, None] ** n[None, :]
    head = pw @ c
    tail = zs ** (k + 1) / (1.0 - zs)
    lb = head - tail
    # derivative bound at the right end (each term increases in z)
    zb = z_hi
    deriv = float(np.dot(n, zb ** (n - 1.0)))
    deriv += (k + 1) * zb ** k / (1.0 - zb) + zb ** (k + 1) / (1.0 - zb) ** 2
    margin = deriv * h / 2.0
    ok = lb > margin
    if ok.all():
        return None
    return float(zs[int(np.argmin(lb))])


def certify_no_zeros(D: int, y: float, eps: float) -> ZeroCountReport:
    """Certify F_D > 0 on (0, 1 - y^(-sqrt(e)+eps)) for an all-ones prefix D.

    Two regimes: below 1 - 1/y the all-ones head dominates the geometric
    tail outright (z(1-2z^k)/(1-z) with k = floor(y)); above it, the head is
    evaluated with the true character values against the same tail bound on
    a certified grid.  A grid-and-bisection zero count over the full interval
    is run as an independent cross-check.
    """
    bad = _verify_all_ones(D, y)
    if bad is not None:
        raise DomainError(
            f"certificate inapplicable: chi_{D}({bad}) != 1 (need chi = 1 up to {y})"
        )
    z_hi = 1.0 - y ** (-SQRT_E + eps)
    if z_hi <= 0.0:
        return ZeroCountReport(
            (0.0, 0.0), GRID_BISECTION, 0, [],
            note="degenerate: upper endpoint clipped to 0; nothing to certify",
        )
    z_hi = min(z_hi, 1.0 - 1e-9)
    tbl = chi_table(D)

    notes = []
    # regime A: (0, 1 - 1/y) with k = floor(y), all-ones head:
    # F(z) >= z (1 - 2 z^k)/(1 - z) > 0 as long as z^k < 1/2 at the right end
    k_a = math.floor(y)
    za = min(1.0 - 1.0 / y, z_hi)
    if za ** k_a >= 0.5:
        return ZeroCountReport(
            (0.0, z_hi), GRID_BISECTION, 0, [],
            note=f"certificate failed in regime A: z^k = {za ** k_a:.3f} >= 1/2",
        )
    notes.append(f"A: (0, {za:.6f}] via all-ones head, z^{k_a} = {za ** k_a:.3g}")

    # regime B: [1 - 1/y, z_hi], k = floor(-A/log z) + 1 piecewise
    if z_hi > za:
        z = za
        while z < z_hi:
            k = math.floor(-UPPER_REGIME_A / math.log(z)) + 1
            # k jumps at exp(-A/m); certify up to the next jump (or z_hi)
            z_next = min(z_hi, math.exp(-UPPER_REGIME_A / k))
            if z_next <= z:
                z_next = z_hi
            cex = _certify_piece(tbl, min(k, abs(D) - 1), z, z_next, step=1e-4)
            if cex is not None:
                grid = count_zeros_grid(D, (0.0, z_hi), points=4096)
                grid.note = f"certificate failed near z = {cex:.6f}"
                return grid
            z = z_next
        notes.append(f"B: [{za:.6f}, {z_hi:.6f}] via {UPPER_REGIME_A:g}-regime head bound")

    grid = count_zeros_grid(D, (0.0, z_hi), points=2048)
    grid.note = "positivity certificate: " + "; ".join(notes)
    return grid
