import math

import pytest

from feketelab.arith import is_fundamental, kronecker
from feketelab.construct import (
    SQRT_E,
    PositivePair,
    certify_no_zeros,
    find_positive_pairs,
    positive_pair_lower_bound,
    vinogradov_check,
)
from feketelab.errors import DomainError
from feketelab.fekete import count_zeros_sturm


def test_find_pair_697():
    pairs = find_positive_pairs(2500, 3, wide=True)
    assert [(p.q1, p.q2, p.D) for p in pairs] == [(17, 41, 697)]
    p = pairs[0]
    assert p.residue_vector == (-1,)  # (3|17) = (3|41) = -1
    assert kronecker(697, 2) == 1 and kronecker(697, 3) == 1


def test_pairs_verified_and_fundamental():
    pairs = find_positive_pairs(10 ** 5, 5, wide=True)
    for p in pairs:
        assert p.D % 8 == 1
        assert is_fundamental(p.D)
        for n in range(2, 6):
            assert kronecker(p.D, n) == 1


def test_pair_count_meets_lower_bound_at_1e6():
    for y in (3, 5):
        count = len(find_positive_pairs(10 ** 6, y, wide=True))
        assert count >= positive_pair_lower_bound(10 ** 6, y)


def test_pair_count_recorded_at_1e5():
    # pre-asymptotic: the bound is not yet met at x = 1e5 (recorded, not asserted)
    count = len(find_positive_pairs(10 ** 5, 3, wide=True))
    bound = positive_pair_lower_bound(10 ** 5, 3)
    assert count > 0
    assert count / bound > 0.5  # within a factor two of the asymptotic target


def test_vinogradov():
    t_max = math.floor(3 ** (SQRT_E - 0.05))
    assert vinogradov_check(697, 3, t_max=t_max) > 0
    # all-ones prefix: ratio 1 for t <= y
    assert vinogradov_check(697, 3, t_max=3) == 1.0
    with pytest.raises(DomainError) as exc:
        vinogradov_check(5, 3)
    assert "2" in str(exc.value)


def test_certify_697():
    rep = certify_no_zeros(697, 3, 0.1)
    assert rep.count == 0
    assert "certificate" in rep.note
    # exact cross-check on the same interval
    z_hi = 1.0 - 3.0 ** (-SQRT_E + 0.1)
    assert count_zeros_sturm(697, (0, f"{z_hi:.6f}"), degree_cap=700).count == 0


def test_certify_inapplicable():
    with pytest.raises(DomainError):
        certify_no_zeros(5, 3, 0.1)


def test_certify_degenerate_interval():
    rep = certify_no_zeros(697, 3, SQRT_E + 1.0)
    assert rep.count == 0
    assert "degenerate" in rep.note


def test_certified_pairs_sweep():
    for y in (3, 5, 7):
        for p in find_positive_pairs(10 ** 6, y, wide=True, limit_count=8):
            assert certify_no_zeros(p.D, y, 0.1).count == 0
            assert vinogradov_check(p.D, y) > 0


def test_positive_pair_validation():
    with pytest.raises(DomainError):
        PositivePair(q1=3, q2=5, D=45, y=3)
    with pytest.raises(DomainError):
        find_positive_pairs(50, 3)
