"""Family-level sweeps over fundamental discriminants and their statistics.

All per-discriminant work is deterministic, so sweeps parallelize over D
with ordered reduction; family sums over chi_D(n) for fixed n are vectorized
through the periodicity of the Kronecker symbol in its top argument.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import multiprocessing
from dataclasses import asdict, dataclass

import numpy as np

from .arith import factor_with_table, fundamental_values, sieve_primes
from .character import (
    QuadraticCharacter,
    legendre_table,
    sign_changes,
    window_bounds,
)
from .errors import DomainError
from .fekete import count_zeros_grid, eval_truncated
from .random_model import window_values_batch
from . import analytic

SCHEMA_VERSION = 1
CSV_HEADER = [
    "D",
    "n_zeros_grid",
    "n_zeros_window",
    "sign_changes_full",
    "sign_changes_window",
    "all_nonneg",
    "log_l_s055",
    "log_l_s075",
]


@dataclass(frozen=True)
class ScanConfig:
    """Resolution and smoothing knobs for family scans (hashed into manifests)."""

    alpha: float = 0.04           # window exponent, must lie in (0, 1/20)
    u_cap: float = 6.0            # zero search covers z in (0, 1 - e^(-u_cap))
    grid_points: int = 96
    refine_tol: float = 1e-9
    trunc_eps: float = 1e-11
    log_l_y: float = 100.0        # smoothing scale for the log-L columns

    def canonical_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)

    def config_hash(self) -> str:
        return hashlib.sha256(self.canonical_json().encode()).hexdigest()[:16]


@dataclass
class FamilyRecord:
    D: int
    n_zeros_grid: int
    n_zeros_window: int
    sign_changes_full: int
    sign_changes_window: int
    all_nonneg: bool
    log_l_s055: float
    log_l_s075: float

    @property
    def log_l_at(self) -> list[tuple[float, float]]:
        return [(0.55, self.log_l_s055), (0.75, self.log_l_s075)]


def record_for(D: int, config: ScanConfig = ScanConfig()) -> FamilyRecord:
    """Compute one FamilyRecord; pure function of (D, config)."""
    chr = QuadraticCharacter(D)
    q = chr.modulus
    per = chr.period_prefix()
    trace = per[1:q]
    full = sign_changes(trace)
    all_nonneg = bool(trace.min() >= 0)

    lo, hi = window_bounds(D, config.alpha)
    win_count = 0
    if lo < hi:
        win_count = sign_changes(trace[lo - 1 : hi]).count

    zmax = 1.0 - math.exp(-config.u_cap)
    grid = count_zeros_grid(
        chr,
        (0.0, zmax),
        points=config.grid_points,
        refine_tol=config.refine_tol,
        tail_eps=config.trunc_eps,
    )
    z_lo = 1.0 - math.exp(-math.log(q) ** (config.alpha / 100.0))
    z_hi = 1.0 - math.exp(-math.log(q) ** config.alpha)
    n_window = sum(1 for (a, b) in grid.brackets if z_lo < 0.5 * (a + b) < z_hi)

    logl = {
        s: analytic.smoothed_log_l(chr, s, config.log_l_y).value for s in (0.55, 0.75)
    }
    return FamilyRecord(
        D=D,
        n_zeros_grid=grid.count,
        n_zeros_window=n_window,
        sign_changes_full=full.count,
        sign_changes_window=win_count,
        all_nonneg=all_nonneg,
        log_l_s055=logl[0.55],
        log_l_s075=logl[0.75],
    )


def _record_worker(args):
    D, config = args
    return record_for(D, config)


def scan_family(x: int, sign: str = "both", config: ScanConfig = ScanConfig(), threads: int = 1):
    """Yield one FamilyRecord per fundamental discriminant |D| <= x, ordered by D."""
    if x < 8:
        raise DomainError(f"need x >= 8, got {x}")
    ds = [int(v) for v in fundamental_values(x, sign)]
    if threads > 1:
        ctx = multiprocessing.get_context("fork")
        with ctx.Pool(threads) as pool:
            yield from pool.imap(_record_worker, ((D, config) for D in ds), chunksize=64)
    else:
        for D in ds:
            yield record_for(D, config)


# --------------------------------------------------------------------------
# Vectorized family sums of chi_D(n) for fixed n

_TWO_TABLE = np.array([0, 1, 0, -1, 0, -1, 0, 1], dtype=np.int8)  # (a|2) by a mod 8


def chi_of_family(d_values: np.ndarray, n: int) -> np.ndarray:
    """kronecker(D, n) for an array of discriminants D and fixed n >= 1.

    Multiplicative over the factorization of n; (a|p) is periodic in a with
    period p (odd p) or 8 (p = 2), so each prime factor is one table lookup.
    """
    if n < 1:
        raise DomainError(f"need n >= 1, got {n}")
    out = np.ones(len(d_values), dtype=np.int8)
    for p, e in factor_with_table(n):
        t = _TWO_TABLE if p == 2 else legendre_table(p)
        mod = 8 if p == 2 else p
        vals = t[d_values % mod]
        if e % 2 == 0:
            vals = np.abs(vals)
        out *= vals
    return out


def orthogonality_check(x: int, n_set) -> list[dict]:
    """Exact family sums sum_{D in F(x)} chi_D(n) with the expected scale.

    Square n: compares against (6/pi^2) x prod_{p|m} p/(p+1); other n:
    reports |sum| / (x^(1/2) n^(1/4) log n).
    """
    ds = fundamental_values(x, "both")
    rows = []
    for n in n_set:
        n = int(n)
        m = math.isqrt(n)
        if m * m == n:
            vals = chi_of_family(ds, n)
            total = int(vals.sum())
            main = 6.0 / math.pi ** 2 * x
            for p, _ in factor_with_table(m):
                main *= p / (p + 1.0)
            rows.append(
                {"n": n, "sum": total, "main_term": main, "deviation": total / main - 1.0}
            )
        else:
            total = int(chi_of_family(ds, n).sum())
            bound = math.sqrt(x) * n ** 0.25 * math.log(n)
            rows.append({"n": n, "sum": total, "bound_ratio": abs(total) / bound})
    return rows


def jutila_check(x: int, N_set) -> list[dict]:
    """Exact second moments sum_{D in F(x)} S_chi_D(N)^2 for each N in N_set."""
    N_set = sorted(int(N) for N in N_set)
    if not N_set or N_set[0] < 1:
        raise DomainError("N_set must contain integers >= 1")
    ds = fundamental_values(x, "both")
    acc = np.zeros(len(ds), dtype=np.float64)
    rows = []
    targets = set(N_set)
    for n in range(1, N_set[-1] + 1):
        acc += chi_of_family(ds, n)
        if n in targets:
            moment = float(np.dot(acc, acc))
            rows.append({"N": n, "moment": moment, "ratio": moment / (x * n)})
    return rows


# --------------------------------------------------------------------------
# Empirical discrepancy against the random model

@dataclass
class DiscrepancyReport:
    s_vector: list[float]
    u_vector: list[float]
    v_vector: list[float]
    family_size: int
    model_trials: int
    boxes_tested: int
    sup_abs_difference: float


def _family_window_matrix(ds: np.ndarray, s_vec, u_vec, v_vec) -> np.ndarray:
    J = len(s_vec)
    out = np.zeros((len(ds), J), dtype=np.float64)
    v_max = int(math.ceil(max(v_vec)))
    primes = sieve_primes(v_max).primes
    for j in range(J):
        sel = primes[(primes > u_vec[j]) & (primes < v_vec[j])]
        for p in sel:
            p = int(p)
            w = math.log(p) / p ** s_vec[j]
            out[:, j] += w * legendre_table(p)[ds % p]
    return out


def _box_differences(fam: np.ndarray, mod: np.ndarray, boxes: int, seed: int) -> tuple[int, float]:
    """Max |P_fam(B) - P_model(B)| over quasi-random boxes and marginal
    half-spaces at pooled deciles."""
    from scipy.stats import qmc

    J = fam.shape[1]
    lo = np.minimum(fam.min(axis=0), mod.min(axis=0)) - 1.0
    hi = np.maximum(fam.max(axis=0), mod.max(axis=0)) + 1.0
    sup = 0.0
    tested = 0

    def box_diff(a, b):
        pf = np.mean(np.all((fam >= a) & (fam <= b), axis=1))
        pm = np.mean(np.all((mod >= a) & (mod <= b), axis=1))
        return abs(pf - pm)

    sob = qmc.Sobol(d=2 * J, scramble=True, seed=seed)
    pts = sob.random(boxes)
    for row in pts:
        a = lo + row[:J] * (hi - lo)
        b = lo + row[J:] * (hi - lo)
        a, b = np.minimum(a, b), np.maximum(a, b)
        sup = max(sup, box_diff(a, b))
        tested += 1
    pooled = np.concatenate([fam, mod], axis=0)
    for j in range(J):
        for qt in np.quantile(pooled[:, j], np.arange(0.1, 0.95, 0.1)):
            a = lo.copy(); b = hi.copy()
            b[j] = qt
            sup = max(sup, box_diff(a, b))
            a2 = lo.copy(); a2[j] = qt
            sup = max(sup, box_diff(a2, hi))
            tested += 2
    return tested, float(sup)


def empirical_discrepancy(
    x: int,
    s_vec,
    u_vec,
    v_vec,
    model_trials: int,
    boxes: int = 128,
    seed: int = 0,
    model_matrix: np.ndarray | None = None,
) -> DiscrepancyReport:
    """Compare the family distribution of windowed Dirichlet polynomials with
    the random model on a finite set of axis-aligned boxes (sup over the
    tested boxes only, a lower bound for the true discrepancy)."""
    s_vec, u_vec, v_vec = list(map(float, s_vec)), list(map(float, u_vec)), list(map(float, v_vec))
    J = len(s_vec)
    if not (len(u_vec) == len(v_vec) == J and J >= 1):
        raise DomainError("s_vec, u_vec, v_vec must have equal nonzero length")
    for u, v in zip(u_vec, v_vec):
        if not 2 <= u < v:
            raise DomainError(f"bad window ({u}, {v})")
    if boxes < 100:
        raise DomainError("need at least 100 boxes")
    ds = fundamental_values(x, "both")
    fam = _family_window_matrix(ds, s_vec, u_vec, v_vec)
    if model_matrix is None:
        limit = int(math.ceil(max(v_vec)))
        cols = [
            window_values_batch(seed + 1, model_trials, s_vec[j], u_vec[j], v_vec[j], limit)
            for j in range(J)
        ]
        model_matrix = np.stack(cols, axis=1)
    tested, sup = _box_differences(fam, model_matrix, boxes, seed)
    return DiscrepancyReport(
        s_vector=s_vec,
        u_vector=u_vec,
        v_vector=v_vec,
        family_size=len(ds),
        model_trials=len(model_matrix),
        boxes_tested=tested,
        sup_abs_difference=sup,
    )


# --------------------------------------------------------------------------
# Mixed moments at the three-point evaluation

@dataclass
class MomentReport:
    x: int
    eps: float
    family_size: int
    S1: float
    S2: float
    # per-point mean absolute values, for the breakdown column
    mean_abs: tuple[float, float, float]


def three_point_values(x: int, eps: float = 0.05):
    """Yield (D, F_D(z1), F_D(z2), F_D(z3)) over positive fundamental D <= x,
    at z1 = exp(-x^(-1/4+eps)), z2 = exp(-x^(-1/2)), z3 = exp(-x^(1/4)/D)."""
    z1 = math.exp(-(x ** (-0.25 + eps)))
    z2 = math.exp(-(x ** -0.5))
    for D in fundamental_values(x, "positive"):
        D = int(D)
        chr = QuadraticCharacter(D)
        z3 = math.exp(-(x ** 0.25) / D)
        f1 = eval_truncated(chr, z1, 1e-12).value
        f2 = eval_truncated(chr, z2, 1e-12).value
        f3 = eval_truncated(chr, z3, 1e-12).value
        yield D, f1, f2, f3


def mixed_moments(x: int, eps: float = 0.05) -> MomentReport:
    """S_j = sum_{D in F+} (F(z1) F(z2) F(z3))^j for j = 1, 2."""
    if x < 10 ** 3:
        raise DomainError(f"need x >= 1000, got {x}")
    s1 = s2 = 0.0
    count = 0
    sums = np.zeros(3)
    for _D, f1, f2, f3 in three_point_values(x, eps):
        prod = f1 * f2 * f3
        s1 += prod
        s2 += prod * prod
        sums += np.abs([f1, f2, f3])
        count += 1
    return MomentReport(
        x=x, eps=eps, family_size=count, S1=s1, S2=s2,
        mean_abs=tuple(sums / max(count, 1)),
    )


def moment_slopes(reports: list[MomentReport]) -> dict[str, float]:
    """Log-log slopes of S1 and S2 across an x ladder (least squares)."""
    xs = np.log([r.x for r in reports])
    out = {}
    for name in ("S1", "S2"):
        ys = np.array([getattr(r, name) for r in reports])
        if len(reports) < 2 or np.any(ys <= 0):
            out[name] = float("nan")
            continue
        out[name] = float(np.polyfit(xs, np.log(ys), 1)[0])
    return out


def min_three_point_filter(x: int, threshold: float, eps: float = 0.05) -> int:
    """Count of D in F+(x) with min |F| over the three points >= threshold."""
    if threshold <= 0:
        raise DomainError("threshold must be positive")
    count = 0
    for _D, f1, f2, f3 in three_point_values(x, eps):
        if min(abs(f1), abs(f2), abs(f3)) >= threshold:
            count += 1
    return count


# --------------------------------------------------------------------------
# Persistence

def _format_float(v: float) -> str:
    return f"{v:.17g}"


def persist(records, sink, fmt: str = "csv", config: ScanConfig = ScanConfig()) -> dict:
    """Write records to a path or file object as CSV or JSON-lines.

    Returns a manifest with the config hash, schema version, and row count.
    Floats are serialized with 17 significant digits (lossless round trip).
    """
    from . import __version__

    close = False
    if isinstance(sink, (str, bytes)):
        fh = open(sink, "w", newline="")
        close = True
    else:
        fh = sink
    rows = 0
    try:
        if fmt == "csv":
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(CSV_HEADER)
            for r in records:
                w.writerow(
                    [
                        r.D,
                        r.n_zeros_grid,
                        r.n_zeros_window,
                        r.sign_changes_full,
                        r.sign_changes_window,
                        "true" if r.all_nonneg else "false",
                        _format_float(r.log_l_s055),
                        _format_float(r.log_l_s075),
                    ]
                )
                rows += 1
        elif fmt == "jsonl":
            for r in records:
                obj = {"schema_version": SCHEMA_VERSION}
                obj.update(asdict(r))
                fh.write(json.dumps(obj, sort_keys=True) + "\n")
                rows += 1
        else:
            raise DomainError(f"unknown format {fmt!r}")
    except OSError:
        return {
            "schema_version": SCHEMA_VERSION,
            "config_hash": config.config_hash(),
            "code_version": __version__,
            "rows": rows,
            "partial": True,
        }
    finally:
        if close:
            fh.close()
    return {
        "schema_version": SCHEMA_VERSION,
        "config_hash": config.config_hash(),
        "code_version": __version__,
        "rows": rows,
        "partial": False,
    }


def load_records(source) -> list[FamilyRecord]:
    """Inverse of persist for both formats (format sniffed from content)."""
    close = False
    if isinstance(source, (str, bytes)):
        fh = open(source, "r")
        close = True
    else:
        fh = source
    try:
        text = fh.read()
    finally:
        if close:
            fh.close()
    records = []
    first = text.lstrip()[:1]
    if first == "{":
        for line in text.splitlines():
            if not line.strip():
                continue
            obj = json.loads(line)
            obj.pop("schema_version", None)
            records.append(FamilyRecord(**obj))
    else:
        rd = csv.reader(io.StringIO(text))
        header = next(rd)
        if header != CSV_HEADER:
            raise DomainError(f"unexpected CSV header {header}")
        for row in rd:
            records.append(
                FamilyRecord(
                    D=int(row[0]),
                    n_zeros_grid=int(row[1]),
                    n_zeros_window=int(row[2]),
                    sign_changes_full=int(row[3]),
                    sign_changes_window=int(row[4]),
                    all_nonneg=row[5] == "true",
                    log_l_s055=float(row[6]),
                    log_l_s075=float(row[7]),
                )
            )
    return records
