"""The multiplicative random model and its Monte Carlo checks.

Per prime p, X(p) takes the values 1, -1, 0 with probabilities
p/(2(p+1)), p/(2(p+1)), 1/(p+1) -- matching the distribution of chi_D(p)
over fundamental discriminants -- and extends multiplicatively by
X(p^a) = X(p)^a.  The Rademacher variant draws X(p) = +-1 uniformly and
extends to squarefree integers only (zero elsewhere).

Randomness comes from a counter-based generator (splitmix64 finalizer over
the tuple (seed, stream, index)), so every draw is a pure function of its
coordinates: results are bit-identical across platforms, thread counts, and
evaluation order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .arith import sieve_primes
from .character import DELETED_ZEROS, SignChangeReport, sign_changes
from .errors import DomainError

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_U64 = np.uint64
_TO_UNIT = 2.0 ** -53


def _finalize(z: np.ndarray) -> np.ndarray:
    z = z.astype(np.uint64, copy=True)
    z ^= z >> _U64(30)
    z *= _MIX1
    z ^= z >> _U64(27)
    z *= _MIX2
    z ^= z >> _U64(31)
    return z


def uniforms(seed: int, streams, idxs) -> np.ndarray:
    """Deterministic uniforms in [0, 1), shape (len(streams), len(idxs))."""
    streams = np.asarray(streams, dtype=np.uint64).reshape(-1, 1)
    idxs = np.asarray(idxs, dtype=np.uint64).reshape(1, -1)
    with np.errstate(over="ignore"):
        h0 = _finalize(np.uint64(seed % (1 << 64)) * _GOLDEN + _MIX1)
        h1 = _finalize(h0 ^ (streams * _GOLDEN + _MIX2))
        h2 = _finalize(h1 ^ (idxs * _GOLDEN + _MIX1))
    return (h2 >> _U64(11)).astype(np.float64) * _TO_UNIT


def _ternary_values(u: np.ndarray, primes: np.ndarray) -> np.ndarray:
    p = primes.astype(np.float64)
    t1 = p / (2.0 * (p + 1.0))
    t2 = p / (p + 1.0)
    return np.where(u < t1, 1, np.where(u < t2, -1, 0)).astype(np.int8)


@dataclass
class ModelSample:
    """One realization of {X(p)}: ternary values for every prime <= limit."""

    seed: int
    limit: int
    stream: int = 0
    primes: np.ndarray = field(init=False, repr=False)
    values: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.limit < 2:
            raise DomainError(f"limit must be >= 2, got {self.limit}")
        self.primes = sieve_primes(self.limit).primes
        u = uniforms(self.seed, [self.stream], np.arange(len(self.primes)))[0]
        self.values = _ternary_values(u, self.primes)

    def prime_value(self, p: int) -> int:
        i = int(np.searchsorted(self.primes, p))
        if i >= len(self.primes) or self.primes[i] != p:
            raise DomainError(f"{p} is not a prime <= {self.limit}")
        return int(self.values[i])

    @property
    def prime_values(self) -> dict[int, int]:
        return {int(p): int(v) for p, v in zip(self.primes, self.values)}

    def value_at(self, n: int) -> int:
        """Multiplicative extension X(n) = prod X(p)^a over n = prod p^a."""
        if n < 1:
            raise DomainError(f"need n >= 1, got {n}")
        out, m = 1, n
        for p, v in zip(self.primes, self.values):
            p = int(p)
            if p * p > m:
                break
            while m % p == 0:
                m //= p
                out *= int(v)
        if m > 1:
            if m > self.limit:
                raise DomainError(f"prime factor {m} of {n} exceeds limit {self.limit}")
            out *= self.prime_value(m)
        return out

    def value_table(self, N: int) -> np.ndarray:
        """X(n) for n = 0..N (X(0) := 0), vectorized over prime powers."""
        if N > self.limit:
            raise DomainError(f"N = {N} exceeds limit {self.limit}")
        f = np.ones(N + 1, dtype=np.int8)
        f[0] = 0
        for p, v in zip(self.primes, self.values):
            p = int(p)
            if p > N:
                break
            pk = p
            while pk <= N:
                f[pk::pk] *= v
                pk *= p
        return f


@dataclass
class RademacherSample:
    """X(p) = +-1 uniformly; multiplicative on squarefree n, zero elsewhere."""

    seed: int
    limit: int
    stream: int = 0
    primes: np.ndarray = field(init=False, repr=False)
    values: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.limit < 2:
            raise DomainError(f"limit must be >= 2, got {self.limit}")
        self.primes = sieve_primes(self.limit).primes
        u = uniforms(self.seed, [self.stream], np.arange(len(self.primes)))[0]
        self.values = np.where(u < 0.5, np.int8(1), np.int8(-1))

    def value_table(self, N: int) -> np.ndarray:
        if N > self.limit:
            raise DomainError(f"N = {N} exceeds limit {self.limit}")
        f = np.ones(N + 1, dtype=np.int8)
        f[0] = 0
        for p, v in zip(self.primes, self.values):
            p = int(p)
            if p > N:
                break
            f[p::p] *= v
        for p in self.primes:
            p = int(p)
            if p * p > N:
                break
            f[p * p :: p * p] = 0
        return f


def sample_model(seed: int, limit: int, stream: int = 0) -> ModelSample:
    return ModelSample(seed=seed, limit=limit, stream=stream)


def sample_rademacher(seed: int, limit: int, stream: int = 0) -> RademacherSample:
    return RademacherSample(seed=seed, limit=limit, stream=stream)


def window_value(sample: ModelSample, s: float, u: float, v: float) -> float:
    """L_{u,v}(s, X) = sum_{u < p < v} X(p) log(p) / p^s."""
    if not (2 <= u < v):
        raise DomainError(f"need 2 <= u < v, got u={u}, v={v}")
    if v > sample.limit:
        raise DomainError(f"window end {v} exceeds sample limit {sample.limit}")
    p = sample.primes.astype(np.float64)
    mask = (p > u) & (p < v)
    pm = p[mask]
    return float(np.sum(sample.values[mask] * np.log(pm) / pm ** s))


def window_values_batch(
    seed: int, trials: int, s: float, u: float, v: float, limit: int,
    chunk: int = 4096,
) -> np.ndarray:
    """window_value over samples with streams 0..trials-1 (vectorized).

    Matches [window_value(sample_model(seed, limit, stream=i), s, u, v)]_i
    up to float summation order; each path is itself deterministic.
    """
    if not (2 <= u < v):
        raise DomainError(f"need 2 <= u < v, got u={u}, v={v}")
    if v > limit:
        raise DomainError(f"window end {v} exceeds limit {limit}")
    primes = sieve_primes(limit).primes
    mask = (primes > u) & (primes < v)
    idxs = np.flatnonzero(mask)
    p = primes[idxs].astype(np.float64)
    w = np.log(p) / p ** s
    out = np.empty(trials, dtype=np.float64)
    for lo in range(0, trials, chunk):
        hi = min(lo + chunk, trials)
        um = uniforms(seed, np.arange(lo, hi), idxs)
        vals = _ternary_values(um, primes[idxs])
        out[lo:hi] = vals @ w
    return out


def window_variance(s: float, u: float, v: float, limit: int) -> float:
    """Exact model variance sum_{u<p<v} (log p)^2 p / (p^(2s) (p+1))."""
    primes = sieve_primes(limit).primes
    p = primes[(primes > u) & (primes < v)].astype(np.float64)
    return float(np.sum(np.log(p) ** 2 * p / (p ** (2 * s) * (p + 1.0))))


def rademacher_partial_sums(sample: RademacherSample, x_max: int) -> SignChangeReport:
    """S^- report for the partial sums sum_{n<=y} f(n), y = 1..x_max."""
    if x_max > sample.limit:
        raise DomainError(f"x_max {x_max} exceeds sample limit {sample.limit}")
    f = sample.value_table(x_max)
    trace = np.cumsum(f[1:], dtype=np.int64)
    return sign_changes(trace, DELETED_ZEROS)


def sign_changes_rows(z: np.ndarray) -> np.ndarray:
    """Row-wise S^- (zeros deleted) for a matrix with entries in {-1, 0, 1}."""
    z = np.asarray(z)
    rows, cols = z.shape
    col = np.broadcast_to(np.arange(cols), (rows, cols))
    idx = np.where(z != 0, col, -1)
    last = np.maximum.accumulate(idx, axis=1)
    prev_idx = np.concatenate(
        [np.full((rows, 1), -1, dtype=np.int64), last[:, :-1]], axis=1
    )
    prev_vals = np.take_along_axis(z, np.clip(prev_idx, 0, None), axis=1)
    flips = (z != 0) & (prev_idx >= 0) & (prev_vals.astype(np.int64) * z < 0)
    return flips.sum(axis=1)


def bamo_check(delta: float, R: int, trials: int, seed: int = 0) -> float:
    """Empirical P(S^-(Z_1..Z_R) <= delta R / 5) with P(Z>0) = P(Z<0) = delta."""
    if not 0 <= delta <= 0.5:
        raise DomainError(f"need 0 <= delta <= 1/2, got {delta}")
    if R < 5:
        raise DomainError(f"need R >= 5, got {R}")
    threshold = delta * R / 5.0
    hits = 0
    chunk = max(1, min(trials, (1 << 22) // R))
    done = 0
    while done < trials:
        n = min(chunk, trials - done)
        u = uniforms(seed, np.arange(done, done + n), np.arange(R))
        z = np.where(u < delta, 1, np.where(u < 2 * delta, -1, 0)).astype(np.int8)
        counts = sign_changes_rows(z)
        hits += int(np.sum(counts <= threshold))
        done += n
    return hits / trials


def bamo_exact(delta: float, R: int, threshold: float | None = None) -> float:
    """Exact P(S^- <= threshold) by exhaustive enumeration of all 3^R outcomes."""
    if R > 12:
        raise DomainError("exhaustive enumeration is capped at R = 12")
    if threshold is None:
        threshold = delta * R / 5.0
    # mixed-radix digits over {1, -1, 0}
    n_seq = 3 ** R
    codes = np.arange(n_seq, dtype=np.int64)
    digits = np.empty((n_seq, R), dtype=np.int8)
    for j in range(R):
        digits[:, j] = codes % 3
        codes //= 3
    z = np.where(digits == 0, 1, np.where(digits == 1, -1, 0)).astype(np.int8)
    n_pm = np.sum(digits != 2, axis=1)
    probs = delta ** n_pm.astype(np.float64) * (1.0 - 2.0 * delta) ** (R - n_pm)
    counts = sign_changes_rows(z)
    return float(np.sum(probs[counts <= threshold]))


@dataclass
class WindowReport:
    r: int
    s: float
    u: float
    v: float
    clipped: bool
    empty: bool
    sigma: float
    threshold: float
    p_above: float
    p_below: float
    p_norm_gt4: float


@dataclass
class PointsSimulationSummary:
    M: int
    R: int
    trials: int
    limit: int
    windows: list[WindowReport]
    sign_change_histogram: dict[int, float]
    adjacent_correlation: float


def sign_change_points_simulation(
    M: int, R: int, trials: int, seed: int = 0, limit: int = 10 ** 5
) -> PointsSimulationSummary:
    """Desk-scale analogue of the thresholded multi-window experiment.

    Samples the vector (L_{u_r,v_r}(s_r, X)) at s_r = 1/2 + M^(-3r) with
    windows (exp(M^(3r-1)), exp(M^(3r+1))) clipped to the prime limit,
    thresholds at 2 M^(3r), and reports per-window exceedance rates plus the
    S^- distribution of the thresholded sequence.
    """
    if M < 3:
        raise DomainError(f"need M >= 3, got {M}")
    if R < 2:
        raise DomainError(f"need R >= 2, got {R}")
    r_lo = max(1, math.ceil(R / 5))
    rs = list(range(r_lo, R + 1))
    values = []
    reports = []
    for r in rs:
        s_r = 0.5 + float(M) ** (-3 * r)
        log_u = float(M) ** (3 * r - 1)
        log_v = float(M) ** (3 * r + 1)
        u_r = math.exp(log_u) if log_u < 700 else float("inf")
        v_r = math.exp(log_v) if log_v < 700 else float("inf")
        clipped = v_r > limit
        v_eff = min(v_r, float(limit))
        empty = not (2 <= u_r < v_eff)
        thr = 2.0 * float(M) ** (3 * r)
        if empty:
            vals = np.zeros(trials)
            sigma = 0.0
        else:
            vals = window_values_batch(seed, trials, s_r, u_r, v_eff, limit)
            sigma = math.sqrt(window_variance(s_r, u_r, v_eff, limit))
        values.append(vals)
        reports.append(
            WindowReport(
                r=r,
                s=s_r,
                u=u_r,
                v=v_eff,
                clipped=clipped,
                empty=empty,
                sigma=sigma,
                threshold=thr,
                p_above=float(np.mean(vals > thr)),
                p_below=float(np.mean(vals < -thr)),
                p_norm_gt4=float(np.mean(np.abs(vals) > 4 * sigma)) if sigma > 0 else 0.0,
            )
        )
    mat = np.stack(values, axis=1)
    thrs = np.array([rep.threshold for rep in reports])
    y = np.where(mat > thrs, 1, np.where(mat < -thrs, -1, 0)).astype(np.int8)
    counts = sign_changes_rows(y)
    hist = {int(k): float(c / trials) for k, c in zip(*np.unique(counts, return_counts=True))}
    corr = 0.0
    live = [i for i, rep in enumerate(reports) if not rep.empty]
    if len(live) >= 2:
        a, b = mat[:, live[0]], mat[:, live[1]]
        if a.std() > 0 and b.std() > 0:
            corr = float(np.corrcoef(a, b)[0, 1])
    return PointsSimulationSummary(
        M=M,
        R=R,
        trials=trials,
        limit=limit,
        windows=reports,
        sign_change_histogram=hist,
        adjacent_correlation=corr,
    )
