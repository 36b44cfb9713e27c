import math

import numpy as np
import pytest

from feketelab.analytic import (
    PiecewiseFunction,
    dirichlet_window,
    fekete_laplace_check,
    karlin_check,
    l_derivative,
    l_value,
    laplace_identity_check,
    mellin_theta_base_residual,
    mellin_theta_check,
    smoothed_l_prime_over_l,
    smoothed_log_l,
    theta,
    theta_zero_scan,
    verify_dirichlet_identity,
)
from feketelab.character import QuadraticCharacter
from feketelab.errors import DomainError


def test_l_value_closed_forms():
    # class number formulas, computed before the build:
    # L(1, chi_5) = 2 log((1+sqrt 5)/2)/sqrt 5 and L(1, chi_-4) = pi/4
    assert l_value(5, 1.0) == pytest.approx(2 * math.log((1 + math.sqrt(5)) / 2) / math.sqrt(5), abs=1e-14)
    assert l_value(-4, 1.0) == pytest.approx(math.pi / 4, abs=1e-14)


def test_l_derivative_matches_series_at_moderate_s():
    # independent oracle: slowly converging alternating series for chi_-4
    # L'(s) = sum chi(n) (-log n) n^-s, Euler-transformed via numpy on 2e6 terms
    n = np.arange(1, 2_000_001)
    chi = np.where(n % 4 == 1, 1.0, np.where(n % 4 == 3, -1.0, 0.0))
    s = 0.9
    terms = -chi * np.log(n) * n ** (-s)
    # average consecutive partial sums to kill the oscillating remainder
    c = np.cumsum(terms)
    est = 0.5 * (c[-1] + c[-2])
    assert l_derivative(-4, s) == pytest.approx(est, abs=1e-4)


def test_smoothed_log_l():
    v = smoothed_log_l(5, 1.0, 1e5)
    assert v.value == pytest.approx(math.log(l_value(5, 1.0)), abs=1e-3)
    assert math.exp(v.value) == pytest.approx(0.430408940964, abs=1e-3)
    with pytest.raises(DomainError):
        smoothed_log_l(5, 0.5, 100.0)
    with pytest.raises(DomainError):
        smoothed_log_l(5, 0.75, 1.0)


def test_smoothed_l_prime_over_l():
    v = smoothed_l_prime_over_l(5, 0.75, 1e4)
    truth = l_derivative(5, 0.75) / l_value(5, 0.75)
    assert v.value == pytest.approx(truth, abs=1e-2)


def test_smoothed_limits_and_finite_difference():
    # y -> infinity at fixed truncation equals the unsmoothed prime-power sum
    a = smoothed_l_prime_over_l(5, 0.8, 1e12, n_max=1000)
    chr = QuadraticCharacter(5)
    manual = 0.0
    for p in range(2, 1001):
        if any(p % d == 0 for d in range(2, int(math.isqrt(p)) + 1)):
            continue
        pk = p
        while pk <= 1000:
            manual -= chr.chi(pk) * math.log(p) / pk ** 0.8
            pk *= p
    assert a.value == pytest.approx(manual, rel=1e-9)
    # d/ds of the smoothed log L matches the smoothed L'/L at matching y
    h = 1e-5
    fd = (smoothed_log_l(5, 0.75 + h, 1e4).value - smoothed_log_l(5, 0.75 - h, 1e4).value) / (2 * h)
    assert fd == pytest.approx(smoothed_l_prime_over_l(5, 0.75, 1e4).value, abs=1e-6)


def test_dirichlet_window():
    assert dirichlet_window(5, 0.75, 2, 3).value == 0.0
    assert dirichlet_window(5, 1.0, 2, 6).value == pytest.approx(-math.log(3) / 3, abs=1e-15)
    # additivity over adjacent disjoint windows
    total = dirichlet_window(13, 0.6, 2, 500).value
    parts = (
        dirichlet_window(13, 0.6, 2, 97.5).value
        + dirichlet_window(13, 0.6, 97.5, 500).value
    )
    assert total == pytest.approx(parts, abs=1e-12)
    # the sampled-point windows are structurally disjoint: 3r+1 < 3(r+1)-1
    for r in range(1, 6):
        assert 3 * r + 1 < 3 * (r + 1) - 1


def test_theta_basics():
    th = theta(5, 1.0)
    assert th.tail_bound <= 1e-14
    with pytest.raises(DomainError):
        theta(5, 0.0)
    with pytest.raises(DomainError):
        theta(-4, 1.0)
    # t -> infinity: leading term chi(1) e^(-pi t / D)
    big = theta(5, 60.0)
    assert big.value == pytest.approx(math.exp(-math.pi * 60.0 / 5), rel=1e-6)


def test_theta_functional_equation():
    for D in (5, 8, 13, 17, 21, 24):
        for t in (0.5, 2.0, 3.0):
            a = theta(D, 1.0 / t).value
            b = math.sqrt(t) * theta(D, t).value
            assert abs(a - b) <= 1e-10 * (1 + abs(theta(D, t).value))


def test_identity_residuals_small_cases():
    assert verify_dirichlet_identity(5, 1.0) <= 1e-8
    assert verify_dirichlet_identity(5, 0.5) <= 1e-6
    assert verify_dirichlet_identity(8, 0.75) <= 1e-6
    assert laplace_identity_check(5, 0.75) <= 1e-8
    assert laplace_identity_check(8, 0.9) <= 1e-8
    assert laplace_identity_check(5, 1.0) <= 1e-8
    assert fekete_laplace_check(5, 0.8) <= 1e-6
    assert fekete_laplace_check(13, 0.6) <= 1e-6
    assert mellin_theta_check(5, 0.75) <= 1e-6
    assert mellin_theta_check(13, 0.5) <= 1e-5


def test_mellin_base_normalization():
    # Gamma(s/2) L(s) = int theta(tD/pi) t^(s/2-1) dt holds as written:
    # the substituted weights are exactly e^(-n^2 t)
    assert mellin_theta_base_residual(5, 0.75) <= 1e-10
    assert mellin_theta_base_residual(13, 0.55) <= 1e-10


def test_identity_domain_errors():
    with pytest.raises(DomainError):
        verify_dirichlet_identity(5, 0.0)
    with pytest.raises(DomainError):
        laplace_identity_check(5, 0.5)
    with pytest.raises(DomainError):
        mellin_theta_check(-8, 0.75)


def test_karlin_trace_function():
    g = PiecewiseFunction.from_partial_sum_trace(QuadraticCharacter(5), 5)
    s_minus, s_plus = karlin_check(g, np.linspace(0.55, 1.0, 25))
    assert s_minus >= s_plus


def test_karlin_nonnegative_g():
    g = PiecewiseFunction.from_step([0.0, 1.0, 2.0, 3.0], [1.0, 0.25, 0.5])
    s_minus, s_plus = karlin_check(g, [0.5, 1.0, 2.0, 4.0])
    assert s_minus == 0 and s_plus == 0


def test_karlin_single_change():
    # g with one sign change: transform has at most one on a dense grid
    g = PiecewiseFunction.from_nodes([0.0, 1.0, 2.0], [1.0, -0.2, -1.5])
    s_minus, s_plus = karlin_check(g, np.linspace(0.05, 20.0, 400))
    assert s_minus == 1 and s_plus <= 1


def test_karlin_laplace_exactness():
    # closed-form transform of a single linear piece vs quadrature
    from scipy.integrate import quad

    g = PiecewiseFunction.from_nodes([0.5, 2.0], [1.0, -1.0])
    for s in (0.3, 1.0, 2.5):
        ref, _ = quad(lambda x: (1.0 - (2.0 / 1.5) * (x - 0.5)) * math.exp(-s * x), 0.5, 2.0)
        assert g.laplace(s) == pytest.approx(ref, abs=1e-12)


def test_theta_zero_scan_d5():
    rep = theta_zero_scan(5, (0.01, 100.0), points=300)
    assert rep.count == 0
    # functional-equation symmetry pairs zeros across t = 1
    left = theta_zero_scan(5, (0.02, 1.0), points=150).count
    right = theta_zero_scan(5, (1.0, 50.0), points=150).count
    assert left == right
