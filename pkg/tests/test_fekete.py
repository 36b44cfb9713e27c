import math

import numpy as np
import pytest

from feketelab.arith import fundamental_values
from feketelab.character import QuadraticCharacter
from feketelab.errors import CapabilityError, DomainError
from feketelab.fekete import (
    bek_bound,
    count_zeros_grid,
    count_zeros_sturm,
    eval_direct,
    eval_grid_truncated,
    eval_poisson_dual,
    eval_truncated,
    jensen_upper_bound,
)

# fixed by the exact-isolation sweep over all fundamental |D| <= 500 run
# before the build: zero counts of F_D on (0, 0.999)
SMALLEST_POSITIVE_WITH_ZERO = 173
SWEEP_COUNTS = {173: 2, 188: 2, 248: 2, 293: 2, 8: 0, 5: 0, -43: 2, -67: 2, -88: 2}


def test_eval_direct_examples():
    c5 = QuadraticCharacter(5)
    assert eval_direct(c5, 0.5).value == pytest.approx(0.1875, abs=1e-15)
    assert eval_direct(c5, 0.0).value == 0.0
    # F_5(z) = z (1-z)^2 (1+z), checked by synthetic division beforehand
    assert eval_direct(c5, 0.3).value == pytest.approx(0.3 * 0.49 * 1.3, abs=1e-15)
    with pytest.raises(DomainError):
        eval_direct(c5, 1.0)
    with pytest.raises(DomainError):
        eval_direct(c5, -0.1)


def test_factorization_identity_on_grid():
    c5 = QuadraticCharacter(5)
    for z in np.linspace(0.01, 0.97, 29):
        expected = z * (1 - z) ** 2 * (1 + z)
        assert eval_direct(c5, float(z)).value == pytest.approx(expected, abs=1e-14)


def test_eval_truncated():
    c5 = QuadraticCharacter(5)
    full = eval_direct(c5, 0.5).value
    t = eval_truncated(c5, 0.5, 1e-15)
    assert abs(t.value - full) <= 1e-15
    z0 = eval_truncated(c5, 0.0, 1e-12)
    assert z0.value == 0.0 and z0.error_bound == 0.0
    with pytest.raises(DomainError):
        eval_truncated(c5, 0.5, 0.0)
    # large fundamental discriminant, z = e^(-1/100)
    D = next(int(v) for v in fundamental_values(10100, "positive") if v > 10 ** 4)
    chr = QuadraticCharacter(D)
    z = math.exp(-1.0 / 100.0)
    tr = eval_truncated(chr, z, 1e-12)
    dr = eval_direct(chr, z)
    assert abs(tr.value - dr.value) <= 1e-12 + dr.error_bound


def test_eval_grid_truncated_matches_direct():
    chr = QuadraticCharacter(173)
    zs = np.linspace(0.0, 0.995, 40)
    vals, errs = eval_grid_truncated(chr.table, zs, 1e-12)
    for z, v, e in zip(zs, vals, errs):
        ref = eval_direct(chr, float(z)).value
        assert abs(v - ref) <= e + 1e-12


def test_poisson_dual_examples():
    for D, T in ((5, 5.0), (13, 13.0)):
        pd = eval_poisson_dual(D, T)
        dd = eval_direct(QuadraticCharacter(D), math.exp(-T / D))
        assert abs(pd.value - dd.value) <= pd.error_bound
    # T = D for moderately large D: wing e^(-D) is negligible
    pd = eval_poisson_dual(173, 173.0)
    dd = eval_direct(QuadraticCharacter(173), math.exp(-1.0))
    assert abs(pd.value - dd.value) <= pd.error_bound
    assert pd.error_bound < 1e-6


def test_poisson_dual_domain():
    with pytest.raises(DomainError):
        eval_poisson_dual(-4, 2.0)
    with pytest.raises(DomainError):
        eval_poisson_dual(5, 0.5)
    with pytest.raises(DomainError):
        eval_poisson_dual(5, 6.0)


def test_grid_examples():
    assert count_zeros_grid(5, (0.0, 0.99), points=10_000).count == 0
    assert count_zeros_grid(5, (0.3, 0.3)).count == 0
    rep = count_zeros_grid(SMALLEST_POSITIVE_WITH_ZERO, (0.0, 0.999), points=4000)
    assert rep.count >= 1
    assert all(hi - lo <= 1e-12 for lo, hi in rep.brackets)


def test_sturm_examples():
    assert count_zeros_sturm(5, (0, 1)).count == 0
    assert count_zeros_sturm(5, (-2, 0)).count == 1
    assert count_zeros_sturm(8, (0, 1)).count == 0
    for D, expected in SWEEP_COUNTS.items():
        assert count_zeros_sturm(D, (0, "0.999")).count == expected
    with pytest.raises(CapabilityError):
        count_zeros_sturm(997, (0, 1), degree_cap=500)


def test_sturm_counts_origin_inside_interval():
    # F_D(0) = 0: z = 0 is a root when the interval strictly contains it
    assert count_zeros_sturm(5, (-0.5, 0.5)).count == 1


def test_grid_le_sturm():
    for D in (int(v) for v in fundamental_values(120, "both")):
        grid = count_zeros_grid(D, (0.0, 0.999), points=2000)
        sturm = count_zeros_sturm(D, (0, "0.999"))
        assert grid.count <= sturm.count


def test_jensen_examples():
    b = jensen_upper_bound(5, 0.5, 0.1, 0.4, 0.1875)
    assert b >= 0
    assert b >= count_zeros_sturm(5, (0.4, 0.6)).count
    with pytest.raises(DomainError):
        jensen_upper_bound(5, 0.5, 0.3999, 0.4, 0.1)
    with pytest.raises(DomainError):
        jensen_upper_bound(5, 0.5, 0.1, 0.4, 0.0)


def test_jensen_dominates_sturm_on_discs():
    for D in (5, 13, 173, -43):
        chr = QuadraticCharacter(abs(D) if D > 0 else D)
        for z0, r, R in ((0.5, 0.2, 0.45), (0.7, 0.1, 0.28)):
            f = abs(eval_direct(chr, z0).value)
            if f < 1e-12:
                continue
            bound = jensen_upper_bound(D, z0, r, R, f)
            exact = count_zeros_sturm(D, (z0 - r, z0 + r)).count
            assert bound >= exact


def test_three_circle_cover_end_to_end():
    # cover [z1, 1) by three discs centered at z1, z2, z3 and bound the total
    # zero count; reported against the x^(1/4) scale, not asserted sharply
    x = 10 ** 4
    eps = 0.05
    z1 = math.exp(-(x ** (-0.25 + eps)))
    z2 = math.exp(-(x ** -0.5))
    from feketelab.family import three_point_values

    for D, f1, f2, f3 in three_point_values(x, eps):
        if min(abs(f1), abs(f2), abs(f3)) >= x ** -100.0 and D > 2000:
            break
    z3 = math.exp(-(x ** 0.25) / D)
    b1 = jensen_upper_bound(D, z1, z2 - z1, 1 - z1, abs(f1))
    b2 = jensen_upper_bound(D, z2, z3 - z2, 1 - z2, abs(f2))
    b3 = jensen_upper_bound(D, z3, 1 - z3, 2 * (1 - z3), abs(f3))
    left = bek_bound(1 - z1)
    total = b1 + b2 + b3 + left
    assert total > 0 and math.isfinite(total)
    print(f"three-circle total bound for D={D} at x=1e4: {total} (~x^0.25 = {x ** 0.25:.0f})")


def test_bek_bound():
    assert bek_bound(0.5) == 16
    assert bek_bound(0.5, c=8.0) == 16
    with pytest.raises(DomainError):
        bek_bound(0.0)
    for D in (int(v) for v in fundamental_values(200, "both")):
        exact = count_zeros_sturm(D, (-0.8, 0.8)).count
        assert exact <= bek_bound(0.2)
