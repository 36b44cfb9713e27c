import math

import numpy as np
import pytest
from sympy import isprime

from feketelab.arith import (
    Discriminant,
    enumerate_fundamental,
    factor_with_table,
    fundamental_values,
    is_fundamental,
    kronecker,
    kronecker_table_mod,
    sieve_primes,
)
from feketelab.errors import DomainError, ResourceError


def test_sieve_small():
    assert list(sieve_primes(10).primes) == [2, 3, 5, 7]
    assert list(sieve_primes(2).primes) == [2]


def test_sieve_million_count():
    # 78498 was fixed by an independent primality-test loop before the build
    table = sieve_primes(10 ** 6)
    assert len(table) == 78498
    # spot-check entries and gaps against an independent primality oracle
    primes = table.primes
    for i in range(0, len(primes), 4999):
        assert isprime(int(primes[i]))
    for n in range(999900, 1000000):
        assert isprime(n) == (n in set(int(p) for p in primes[-20:]))


def test_sieve_domain_and_budget():
    with pytest.raises(DomainError):
        sieve_primes(1)
    with pytest.raises(ResourceError):
        sieve_primes(2 ** 40)


def test_kronecker_examples():
    assert kronecker(5, 2) == -1
    assert kronecker(5, 1) == 1
    assert kronecker(12, 35) == 1
    assert kronecker(3, 0) == 0 and kronecker(1, 0) == 1
    assert kronecker(-7, -1) == -1 and kronecker(7, -1) == 1


def test_kronecker_multiplicative_box():
    for a in range(-50, 51):
        for m in range(1, 41):
            km = kronecker(a, m)
            for n in range(1, 41):
                assert kronecker(a, m * n) == km * kronecker(a, n)


def test_kronecker_euler_criterion():
    for p in sieve_primes(200).primes[1:]:
        p = int(p)
        for a in range(1, p):
            e = pow(a, (p - 1) // 2, p)
            expected = 1 if e == 1 else -1
            assert kronecker(a, p) == expected


def test_kronecker_zero_iff_common_factor():
    for a in range(-60, 61):
        for n in range(1, 61):
            assert (kronecker(a, n) == 0) == (math.gcd(a, n) != 1)


def test_is_fundamental():
    assert is_fundamental(5)
    assert is_fundamental(12)
    assert not is_fundamental(9)
    assert is_fundamental(-4) and is_fundamental(-8) and is_fundamental(-3)
    assert not is_fundamental(-5)
    assert is_fundamental(1)  # trivial character; excluded from enumeration
    with pytest.raises(DomainError):
        is_fundamental(0)
    with pytest.raises(DomainError):
        Discriminant(0, False)


def test_enumerate_examples():
    assert [d.value for d in enumerate_fundamental(20, "positive")] == [5, 8, 12, 13, 17]
    assert enumerate_fundamental(4, "positive") == []


def test_enumerate_matches_filter_oracle():
    vals = set(int(v) for v in fundamental_values(300, "both"))
    expected = set()
    for n in range(2, 301):
        if is_fundamental(n):
            expected.add(n)
        if is_fundamental(-n):
            expected.add(-n)
    assert vals == expected
    neg = fundamental_values(300, "negative")
    assert np.all(neg < 0) and np.all(np.diff(neg) > 0)


def test_density_toward_6_over_pi_squared():
    x = 10 ** 5
    count = len(fundamental_values(x, "both"))
    assert abs(count / x - 6 / math.pi ** 2) < 0.005


def test_character_periodicity():
    from feketelab.character import chi_table

    for D in (int(v) for v in fundamental_values(500, "both")):
        q = abs(D)
        tbl = chi_table(D)
        step = 1 if q <= 100 else 7
        for n in range(1, 3 * q, step):
            assert kronecker(D, n) == tbl[n % q]


def test_kronecker_table_mod_periodicity():
    for n in (2, 3, 12, 45):
        t = kronecker_table_mod(n)
        for a in range(-3 * n, 3 * n):
            assert t[a % (8 * n)] == kronecker(a, n)


def test_factor_with_table():
    assert factor_with_table(360) == [(2, 3), (3, 2), (5, 1)]
    assert factor_with_table(97) == [(97, 1)]
    assert factor_with_table(1) == []
