"""Integer arithmetic substrate: primes, Kronecker symbols, fundamental discriminants.

A discriminant D is fundamental when either D is squarefree with D = 1 (mod 4),
or D = 4m with m squarefree and m = 2 or 3 (mod 4).  The quadratic character
attached to D is chi_D(n) = kronecker(D, n).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import DomainError, ResourceError

# Hard cap on sieve allocations (bytes of flag array).
SIEVE_MEMORY_BUDGET = 2 ** 31


@dataclass(frozen=True)
class PrimeTable:
    """All primes up to ``limit``, ascending."""

    limit: int
    primes: np.ndarray = field(repr=False)

    def __len__(self) -> int:
        return len(self.primes)

    def __iter__(self):
        return iter(self.primes)


@lru_cache(maxsize=8)
def sieve_primes(limit: int) -> PrimeTable:
    """Sieve of Eratosthenes; returns every prime <= limit.

    Results are cached; treat the returned table as read-only.
    """
    if limit < 2:
        raise DomainError(f"sieve limit must be >= 2, got {limit}")
    if limit + 1 > SIEVE_MEMORY_BUDGET:
        raise ResourceError(
            f"sieve limit {limit} exceeds memory budget {SIEVE_MEMORY_BUDGET}"
        )
    flags = np.ones(limit + 1, dtype=bool)
    flags[:2] = False
    for p in range(2, math.isqrt(limit) + 1):
        if flags[p]:
            flags[p * p :: p] = False
    return PrimeTable(limit=limit, primes=np.flatnonzero(flags).astype(np.int64))


def kronecker(a: int, n: int) -> int:
    """Kronecker symbol (a|n), defined for all integers.

    Extends the Jacobi symbol by (a|2) = 0, 1, -1 for a even, a = +-1 (mod 8),
    a = +-3 (mod 8), together with (a|-1) = sign(a) and (a|0) = [a = +-1].
    """
    if n == 0:
        return 1 if a in (1, -1) else 0
    result = 1
    if n < 0:
        n = -n
        if a < 0:
            result = -1
    if n % 2 == 0:
        if a % 2 == 0:
            return 0
        e = 0
        while n % 2 == 0:
            n //= 2
            e += 1
        if e % 2 == 1 and a % 8 in (3, 5):
            result = -result
    a %= n
    while a != 0:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                result = -result
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            result = -result
        a %= n
    return result if n == 1 else 0


def _is_squarefree(m: int) -> bool:
    m = abs(m)
    if m == 0:
        return False
    d = 2
    while d * d <= m:
        if m % (d * d) == 0:
            return False
        while m % d == 0:
            m //= d
        d += 1 if d == 2 else 2
    return True


def is_fundamental(D: int) -> bool:
    """True when D is a fundamental discriminant (D = 1 passes the predicate;
    enumeration skips it because its character is trivial)."""
    if D == 0:
        raise DomainError("D = 0 is not a discriminant")
    if D % 4 == 1:
        return _is_squarefree(D)
    if D % 4 == 0:
        m = D // 4
        return m % 4 in (2, 3) and _is_squarefree(m)
    return False


@dataclass(frozen=True)
class Discriminant:
    value: int
    is_fundamental: bool

    def __post_init__(self):
        if self.value == 0:
            raise DomainError("D = 0 is not a discriminant")


def _squarefree_flags(x: int) -> np.ndarray:
    """Boolean array sf[0..x], sf[n] = n squarefree (sf[0] = False)."""
    if (x + 1) > SIEVE_MEMORY_BUDGET:
        raise ResourceError(f"squarefree sieve to {x} exceeds memory budget")
    sf = np.ones(x + 1, dtype=bool)
    sf[0] = False
    for p in range(2, math.isqrt(x) + 1):
        sf[p * p :: p * p] = False
    return sf


def fundamental_values(x: int, sign: str = "both") -> np.ndarray:
    """Values of all fundamental discriminants with |D| <= x, ascending.

    D = 1 is excluded.  ``sign`` is one of ``positive``, ``negative``, ``both``.
    """
    if x < 3:
        raise DomainError(f"x must be >= 3, got {x}")
    if sign not in ("positive", "negative", "both"):
        raise DomainError(f"bad sign {sign!r}")
    sf = _squarefree_flags(x)
    n = np.arange(x + 1)
    out = []
    if sign in ("positive", "both"):
        pos1 = n[(n % 4 == 1) & sf & (n > 1)]
        n4 = n[(n % 4 == 0) & (n >= 8)]
        m = n4 // 4
        pos4 = n4[(m % 4 >= 2) & sf[m]]
        out.append(np.sort(np.concatenate([pos1, pos4])))
    if sign in ("negative", "both"):
        # -n fundamental: n = 3 (mod 4) squarefree, or n = 4k with k = 1, 2 (mod 4) squarefree
        neg1 = n[(n % 4 == 3) & sf]
        n4 = n[(n % 4 == 0) & (n >= 4)]
        k = n4 // 4
        neg4 = n4[((k % 4 == 1) | (k % 4 == 2)) & sf[k]]
        negs = -np.sort(np.concatenate([neg1, neg4]))[::-1]
        out.insert(0, negs)
    return np.concatenate(out).astype(np.int64)


def enumerate_fundamental(x: int, sign: str = "both") -> list[Discriminant]:
    """Fundamental discriminants with |D| <= x and the requested sign, ascending."""
    return [Discriminant(int(v), True) for v in fundamental_values(x, sign)]


def factor_with_table(n: int, primes: np.ndarray | None = None) -> list[tuple[int, int]]:
    """Factor |n| by trial division, returning (prime, exponent) pairs."""
    n = abs(n)
    if n <= 1:
        return []
    out = []
    if primes is None:
        primes = sieve_primes(max(2, math.isqrt(n))).primes
    for p in primes:
        p = int(p)
        if p * p > n:
            break
        if n % p == 0:
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            out.append((p, e))
    if n > 1:
        out.append((n, 1))
    return out


def kronecker_table_mod(n: int) -> np.ndarray:
    """Table t with t[a mod 8n] = kronecker(a, n) for fixed n > 0.

    The top-argument map a -> (a|n) is periodic with period dividing 8n,
    which makes family sums over many discriminants vectorizable.
    """
    if n <= 0:
        raise DomainError("kronecker_table_mod needs n > 0")
    period = 8 * n
    return np.array([kronecker(a, n) for a in range(period)], dtype=np.int8)
