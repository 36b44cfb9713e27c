import math

import numpy as np
import pytest

from feketelab.arith import sieve_primes
from feketelab.errors import DomainError
from feketelab.random_model import (
    bamo_check,
    bamo_exact,
    rademacher_partial_sums,
    sample_model,
    sample_rademacher,
    sign_change_points_simulation,
    sign_changes_rows,
    uniforms,
    window_value,
    window_values_batch,
    window_variance,
)


def test_determinism():
    a = sample_model(42, 500)
    b = sample_model(42, 500)
    assert np.array_equal(a.values, b.values)
    c = sample_model(43, 500)
    assert not np.array_equal(a.values, c.values)
    # per-prime values do not depend on the limit
    d = sample_model(42, 2000)
    assert np.array_equal(d.values[: len(a.values)], a.values)


def test_marginals_within_3_sigma():
    trials = 200_000
    for i, p in enumerate([2, 3, 5, 7, 11]):
        u = uniforms(7, np.arange(trials), [i])[:, 0]
        t1, t2 = p / (2 * (p + 1)), p / (p + 1)
        x = np.where(u < t1, 1, np.where(u < t2, -1, 0))
        for target, prob in ((1, t1), (-1, t1), (0, 1 / (p + 1))):
            emp = float(np.mean(x == target))
            sigma = math.sqrt(prob * (1 - prob) / trials)
            assert abs(emp - prob) <= 3 * sigma, (p, target, emp, prob)


def test_multiplicativity():
    s = sample_model(5, 10 ** 4)
    tab = s.value_table(10 ** 3)
    for m in range(2, 1000):
        for n in (2, 3, 5, 7, 9):
            if m * n >= 1000 or math.gcd(m, n) != 1:
                continue
            assert tab[m * n] == tab[m] * tab[n]
    # powers: X(p^2) = X(p)^2
    assert tab[4] == tab[2] ** 2
    assert tab[8] == tab[2] ** 3
    assert s.value_at(12) == s.prime_value(2) ** 2 * s.prime_value(3)


def test_window_value_and_batch():
    s = sample_model(42, 1000)
    with pytest.raises(DomainError):
        window_value(s, 0.75, 10, 2000)
    b = window_values_batch(42, 4, 0.75, 10, 300, 1000)
    singles = [window_value(sample_model(42, 1000, stream=i), 0.75, 10, 300) for i in range(4)]
    assert np.allclose(b, singles, rtol=1e-12)
    # empty window
    assert window_value(s, 0.75, 13, 13.5) == 0.0


def test_window_variance_within_3_sigma():
    trials = 60_000
    s, u, v, limit = 0.55, 10.0, 10 ** 4, 10 ** 4
    vals = window_values_batch(11, trials, s, u, v, limit)
    exact = window_variance(s, u, v, limit)
    # exact sampling band: Var(s^2) ~ (mu4 - sigma^4)/n with
    # mu4 = 3 sigma^4 + sum kappa4 per independent prime term
    primes = sieve_primes(limit).primes
    p = primes[(primes > u) & (primes < v)].astype(np.float64)
    w = np.log(p) / p ** s
    e2 = p / (p + 1.0)
    kappa4 = w ** 4 * (e2 - 3 * e2 ** 2)
    mu4 = 3 * exact ** 2 + float(kappa4.sum())
    band = 3 * math.sqrt((mu4 - exact ** 2) / trials)
    assert abs(vals.var() - exact) <= band


def test_disjoint_window_covariance():
    trials = 60_000
    a = window_values_batch(3, trials, 0.6, 10, 100, 10 ** 4)
    b = window_values_batch(3, trials, 0.6, 100, 1000, 10 ** 4)
    cov = float(np.mean(a * b) - a.mean() * b.mean())
    band = 3 * math.sqrt(window_variance(0.6, 10, 100, 10 ** 4) * window_variance(0.6, 100, 1000, 10 ** 4) / trials)
    assert abs(cov) <= band


def test_sign_changes_rows():
    z = np.array(
        [[1, 0, -1, 0, 1], [0, 0, 0, 0, 0], [1, 1, 1, 1, 1], [-1, 1, -1, 1, -1]],
        dtype=np.int8,
    )
    assert list(sign_changes_rows(z)) == [2, 0, 0, 4]


def test_rademacher():
    r = sample_rademacher(3, 10 ** 4)
    tab = r.value_table(100)
    assert tab[1] == 1
    assert tab[4] == 0 and tab[12] == 0 and tab[18] == 0
    assert tab[6] == tab[2] * tab[3]
    rep = rademacher_partial_sums(r, 10 ** 4)
    assert rep.count >= 0
    # f(1) = 1 always: the trace starts positive
    for seed in range(5):
        s = sample_rademacher(seed, 100)
        assert s.value_table(10)[1] == 1


def test_rademacher_zero_mean():
    # mean of S(x_max) over seeds is 0 within 3 sigma of the empirical spread
    totals = []
    for seed in range(400):
        s = sample_rademacher(seed, 2000)
        totals.append(int(np.sum(s.value_table(2000)[2:])))
    totals = np.array(totals, dtype=np.float64)
    assert abs(totals.mean()) <= 3 * totals.std() / math.sqrt(len(totals))


def test_bamo_exact_vs_monte_carlo():
    for delta, R in ((0.3, 8), (0.5, 10)):
        exact = bamo_exact(delta, R)
        trials = 200_000
        emp = bamo_check(delta, R, trials, seed=9)
        sigma = math.sqrt(exact * (1 - exact) / trials)
        assert abs(emp - exact) <= 3 * sigma
    with pytest.raises(DomainError):
        bamo_exact(0.3, 13)


def test_bamo_edges():
    assert bamo_check(0.0, 10, 50, seed=0) == 1.0
    assert bamo_check(0.5, 100, 50_000, seed=1) <= 1e-4


def test_points_simulation():
    summ = sign_change_points_simulation(3, 5, 3000, seed=2, limit=10 ** 5)
    live = [w for w in summ.windows if not w.empty]
    assert len(live) >= 1
    assert all(w.clipped for w in summ.windows)
    assert abs(summ.adjacent_correlation) <= 3 / math.sqrt(3000) + 1e-9
    assert sum(summ.sign_change_histogram.values()) == pytest.approx(1.0)
    # normalized tail of the one live window is Gaussian-small
    assert live[0].p_norm_gt4 <= 1e-2
