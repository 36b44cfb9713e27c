"""Command-line front end: every experiment as a subcommand with reproducible
config and CSV / JSON-lines output.

Exit codes: 0 success, 2 domain error, 3 I/O error, 64 usage error.
Identical configurations (including --seed) produce byte-identical primary
output files; wall time lives only in the side manifest.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
import time

import numpy as np

from . import __version__, analytic, construct, family, fekete, random_model
from .character import (
    QuadraticCharacter,
    legendre_trace,
    partial_sums,
    sign_changes,
    sign_changes_in_window,
)
from .errors import CapabilityError, DomainError, NumericalError, ResourceError

USAGE_EXIT = 64


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"error: {message}\n")
        raise SystemExit(USAGE_EXIT)


def _config_hash(cfg: dict) -> str:
    return hashlib.sha256(json.dumps(cfg, sort_keys=True).encode()).hexdigest()[:16]


def _emit(payload: dict, args) -> None:
    if args.json:
        print(json.dumps(payload, sort_keys=True, default=str))
    else:
        for k, v in payload.items():
            print(f"{k}: {v}")


def _write_manifest(out_path: str, cfg: dict, rows: int, t0: float) -> None:
    manifest = {
        "config": cfg,
        "config_hash": _config_hash(cfg),
        "schema_version": family.SCHEMA_VERSION,
        "code_version": __version__,
        "rows": rows,
        "wall_time_s": round(time.time() - t0, 3),
    }
    with open(out_path + ".manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _interval(text: str) -> tuple[float, float]:
    a, b = (float(t) for t in text.split(","))
    return a, b


def _float_list(text: str) -> list[float]:
    return [float(t) for t in text.split(",")]


def _int_list(text: str) -> list[int]:
    return [int(t) for t in text.split(",")]


def build_parser() -> _Parser:
    p = _Parser(prog="feketelab", description=__doc__)
    p.add_argument("--json", action="store_true", default=False,
                   help="machine-readable output")
    p.add_argument("--threads", type=int, default=1, help="parallel workers")
    # the same flags are accepted after the subcommand; SUPPRESS keeps a
    # subcommand parse from clobbering a value given before it
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", default=argparse.SUPPRESS)
    common.add_argument("--threads", type=int, default=argparse.SUPPRESS)

    def add_parser(name, **kw):
        return sub.add_parser(name, parents=[common], **kw)

    sub = p.add_subparsers(dest="cmd", required=True)

    sp = add_parser("scan-family", help="per-discriminant statistics over |D| <= x")
    sp.add_argument("--x", type=int, required=True)
    sp.add_argument("--sign", choices=["positive", "negative", "both"], default="both")
    sp.add_argument("--out", required=True)
    sp.add_argument("--format", choices=["csv", "jsonl"], default="csv")
    sp.add_argument("--alpha", type=float, default=0.04)

    sp = add_parser("sign-changes", help="partial-sum sign changes for one D")
    sp.add_argument("--d", type=int, required=True)
    sp.add_argument("--alpha", type=float, default=0.04)

    sp = add_parser("legendre-trace", help="partial sums of the Legendre symbol mod p")
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--emit", choices=["csv", "none"], default="none")
    sp.add_argument("--out", default=None)

    sp = add_parser("fekete-zeros", help="count real zeros of F_D on an interval")
    sp.add_argument("--d", type=int, required=True)
    sp.add_argument("--interval", type=_interval, default=(0.0, 0.999))
    sp.add_argument("--method", choices=["grid", "sturm"], default="grid")
    sp.add_argument("--points", type=int, default=10000)

    sp = add_parser("fekete-eval", help="evaluate F_D(z) by one of three methods")
    sp.add_argument("--d", type=int, required=True)
    sp.add_argument("--method", choices=["direct", "truncated", "poisson"], default="direct")
    sp.add_argument("--z", type=float, default=None)
    sp.add_argument("--t", type=float, default=None, help="poisson: z = exp(-T/D)")
    sp.add_argument("--tail-eps", type=float, default=1e-12)

    sp = add_parser("theta-scan", help="sign changes of theta(t, chi_D)")
    sp.add_argument("--d", type=int, required=True)
    sp.add_argument("--t-range", type=_interval, default=(0.01, 100.0))
    sp.add_argument("--points", type=int, default=512)

    sp = add_parser("identity-check", help="residual of one transform identity")
    sp.add_argument("kind", choices=["dirichlet", "laplace", "fekete-laplace", "mellin"])
    sp.add_argument("--d", type=int, required=True)
    sp.add_argument("--s", type=float, required=True)
    sp.add_argument("--quad-tol", type=float, default=1e-10)

    sp = add_parser("random-model", help="Monte Carlo checks of the random model")
    sp.add_argument("mode", choices=["marginals", "variance", "bamo", "rmf-signs", "points-sim"])
    sp.add_argument("--seed", type=int, required=True)
    sp.add_argument("--trials", type=int, default=100000)
    sp.add_argument("--limit", type=int, default=10000)
    sp.add_argument("--s", type=float, default=0.55)
    sp.add_argument("--u", type=float, default=10.0)
    sp.add_argument("--v", type=float, default=10000.0)
    sp.add_argument("--delta", type=float, default=0.5)
    sp.add_argument("--r", type=int, default=100)
    sp.add_argument("--m", type=int, default=3)
    sp.add_argument("--x-max", type=int, default=10000)

    sp = add_parser("discrepancy", help="family vs model distribution distance")
    sp.add_argument("--x", type=int, required=True)
    sp.add_argument("--s", type=_float_list, required=True)
    sp.add_argument("--u", type=_float_list, required=True)
    sp.add_argument("--v", type=_float_list, required=True)
    sp.add_argument("--trials", type=int, default=100000)
    sp.add_argument("--boxes", type=int, default=128)
    sp.add_argument("--seed", type=int, required=True)

    sp = add_parser("moments", help="three-point mixed moments over an x ladder")
    sp.add_argument("--x-ladder", type=_int_list, default=[1000, 3000, 10000])
    sp.add_argument("--eps", type=float, default=0.05)
    sp.add_argument("--out", default=None)

    sp = add_parser("orthogonality", help="family sums of chi_D(n)")
    sp.add_argument("--x", type=int, required=True)
    sp.add_argument("--n-set", type=_int_list, default=[1, 2, 4])

    sp = add_parser("jutila", help="family second moments of S_chi(N)")
    sp.add_argument("--x", type=int, required=True)
    sp.add_argument("--n-set", type=_int_list, default=[1, 10, 100])

    sp = add_parser("construct-positive", help="all-ones-prefix discriminant pairs")
    sp.add_argument("--x", type=int, required=True)
    sp.add_argument("--y", type=float, required=True)
    sp.add_argument("--wide", action="store_true")
    sp.add_argument("--limit", type=int, default=None)
    sp.add_argument("--certify", action="store_true",
                    help="attach a no-zero certificate to each pair")
    sp.add_argument("--eps", type=float, default=0.1)
    sp.add_argument("--out", default=None)

    return p


def _cmd_scan_family(args) -> int:
    cfg = {
        "cmd": "scan-family", "x": args.x, "sign": args.sign,
        "format": args.format, "alpha": args.alpha, "threads": args.threads,
    }
    t0 = time.time()
    config = family.ScanConfig(alpha=args.alpha)
    records = family.scan_family(args.x, args.sign, config, threads=args.threads)
    manifest = family.persist(records, args.out, args.format, config)
    _write_manifest(args.out, cfg, manifest["rows"], t0)
    _emit({"rows": manifest["rows"], "out": args.out, "config_hash": _config_hash(cfg)}, args)
    return 0


def _cmd_sign_changes(args) -> int:
    chr = QuadraticCharacter(args.d)
    trace = partial_sums(chr, chr.modulus - 1)
    full = sign_changes(trace)
    win = sign_changes_in_window(chr, args.alpha)
    _emit(
        {
            "D": args.d,
            "sign_changes_full": full.count,
            "sign_changes_window": win.count,
            "window": win.range,
            "window_degenerate": win.degenerate,
            "min_partial_sum": int(trace.min()),
        },
        args,
    )
    return 0


def _cmd_legendre_trace(args) -> int:
    trace = legendre_trace(args.p)
    rep = sign_changes(trace)
    if args.emit == "csv":
        out = args.out or f"legendre_trace_{args.p}.csv"
        cfg = {"cmd": "legendre-trace", "p": args.p}
        t0 = time.time()
        with open(out, "w") as fh:
            fh.write("N,S\n")
            for i, v in enumerate(trace, start=1):
                fh.write(f"{i},{int(v)}\n")
        _write_manifest(out, cfg, len(trace), t0)
    _emit(
        {"p": args.p, "min": int(trace.min()), "max": int(trace.max()),
         "sign_changes": rep.count, "rows": len(trace)},
        args,
    )
    return 0


def _cmd_fekete_zeros(args) -> int:
    if args.method == "sturm":
        rep = fekete.count_zeros_sturm(args.d, args.interval)
    else:
        rep = fekete.count_zeros_grid(args.d, args.interval, points=args.points)
    _emit(
        {"D": args.d, "method": rep.method, "interval": rep.interval,
         "count": rep.count, "brackets": rep.brackets, "note": rep.note},
        args,
    )
    return 0


def _cmd_fekete_eval(args) -> int:
    if args.method == "poisson":
        if args.t is None:
            raise DomainError("poisson method needs --t")
        fe = fekete.eval_poisson_dual(args.d, args.t)
    else:
        if args.z is None:
            raise DomainError(f"{args.method} method needs --z")
        if args.method == "direct":
            fe = fekete.eval_direct(args.d, args.z)
        else:
            fe = fekete.eval_truncated(args.d, args.z, args.tail_eps)
    _emit(
        {"D": fe.D, "z": fe.z, "value": fe.value, "method": fe.method,
         "error_bound": fe.error_bound},
        args,
    )
    return 0


def _cmd_theta_scan(args) -> int:
    rep = analytic.theta_zero_scan(args.d, args.t_range, args.points)
    _emit(
        {"D": args.d, "t_range": rep.range, "sign_changes": rep.count,
         "positions": rep.positions},
        args,
    )
    return 0


def _cmd_identity_check(args) -> int:
    fn = {
        "dirichlet": analytic.verify_dirichlet_identity,
        "laplace": analytic.laplace_identity_check,
        "fekete-laplace": analytic.fekete_laplace_check,
        "mellin": analytic.mellin_theta_check,
    }[args.kind]
    residual = fn(args.d, args.s, args.quad_tol)
    _emit({"identity": args.kind, "D": args.d, "s": args.s, "residual": residual}, args)
    return 0


def _cmd_random_model(args) -> int:
    if args.mode == "marginals":
        primes = [2, 3, 5, 7][:4]
        rows = {}
        for i, p in enumerate(primes):
            u = random_model.uniforms(args.seed, np.arange(args.trials), [i])[:, 0]
            t1, t2 = p / (2 * (p + 1)), p / (p + 1)
            x = np.where(u < t1, 1, np.where(u < t2, -1, 0))
            rows[p] = {
                "p_plus": float(np.mean(x == 1)),
                "p_minus": float(np.mean(x == -1)),
                "p_zero": float(np.mean(x == 0)),
                "expected_pm": p / (2.0 * (p + 1)),
                "expected_zero": 1.0 / (p + 1),
            }
        _emit({"trials": args.trials, "marginals": rows}, args)
    elif args.mode == "variance":
        vals = random_model.window_values_batch(
            args.seed, args.trials, args.s, args.u, args.v, args.limit
        )
        _emit(
            {
                "trials": args.trials,
                "empirical_variance": float(vals.var()),
                "exact_variance": random_model.window_variance(args.s, args.u, args.v, args.limit),
            },
            args,
        )
    elif args.mode == "bamo":
        prob = random_model.bamo_check(args.delta, args.r, args.trials, args.seed)
        payload = {"delta": args.delta, "R": args.r, "trials": args.trials,
                   "empirical_probability": prob,
                   "bound_scale": math.exp(-args.delta * args.r / 3.0)}
        if args.r <= 12:
            payload["exact_probability"] = random_model.bamo_exact(args.delta, args.r)
        _emit(payload, args)
    elif args.mode == "rmf-signs":
        counts = []
        for i in range(args.trials):
            sample = random_model.sample_rademacher(args.seed, args.x_max, stream=i)
            counts.append(random_model.rademacher_partial_sums(sample, args.x_max).count)
        counts = np.array(counts)
        scale = math.log(math.log(args.x_max)) / math.log(math.log(math.log(math.log(max(args.x_max, 16)))))
        _emit(
            {"x_max": args.x_max, "trials": args.trials,
             "median_sign_changes": float(np.median(counts)),
             "mean_sign_changes": float(counts.mean()),
             "loglog_over_log4_scale": scale},
            args,
        )
    else:  # points-sim
        summary = random_model.sign_change_points_simulation(
            args.m, args.r, args.trials, args.seed, args.limit
        )
        payload = {
            "M": summary.M, "R": summary.R, "trials": summary.trials,
            "windows": [vars(w) for w in summary.windows],
            "sign_change_histogram": summary.sign_change_histogram,
            "adjacent_correlation": summary.adjacent_correlation,
        }
        _emit(payload, args)
    return 0


def _cmd_discrepancy(args) -> int:
    rep = family.empirical_discrepancy(
        args.x, args.s, args.u, args.v, args.trials, args.boxes, args.seed
    )
    bound = len(args.s) / math.log(args.x) ** 0.1
    _emit(
        {"x": args.x, "J": len(args.s), "family_size": rep.family_size,
         "model_trials": rep.model_trials, "boxes_tested": rep.boxes_tested,
         "sup_abs_difference": rep.sup_abs_difference,
         "asymptotic_scale": bound},
        args,
    )
    return 0


def _cmd_moments(args) -> int:
    reports = [family.mixed_moments(x, args.eps) for x in args.x_ladder]
    slopes = family.moment_slopes(reports)
    payload = {
        "eps": args.eps,
        "ladder": [
            {"x": r.x, "family_size": r.family_size, "S1": r.S1, "S2": r.S2}
            for r in reports
        ],
        "slope_S1": slopes["S1"],
        "slope_S2": slopes["S2"],
        "target_slope_S1": 1.75 - args.eps / 2.0,
        "target_slope_S2": 2.5,
    }
    if args.out:
        cfg = {"cmd": "moments", "x_ladder": args.x_ladder, "eps": args.eps}
        t0 = time.time()
        with open(args.out, "w") as fh:
            fh.write("x,family_size,S1,S2\n")
            for r in reports:
                fh.write(f"{r.x},{r.family_size},{r.S1:.17g},{r.S2:.17g}\n")
        _write_manifest(args.out, cfg, len(reports), t0)
    _emit(payload, args)
    return 0


def _cmd_orthogonality(args) -> int:
    rows = family.orthogonality_check(args.x, args.n_set)
    _emit({"x": args.x, "rows": rows}, args)
    return 0


def _cmd_jutila(args) -> int:
    rows = family.jutila_check(args.x, args.n_set)
    _emit({"x": args.x, "rows": rows}, args)
    return 0


def _cmd_construct_positive(args) -> int:
    pairs = construct.find_positive_pairs(args.x, args.y, args.limit, args.wide)
    certs = {}
    if args.certify:
        certs = {p.D: construct.certify_no_zeros(p.D, p.y, args.eps) for p in pairs}
    payload = {
        "x": args.x, "y": args.y, "wide": args.wide, "count": len(pairs),
        "lower_bound": construct.positive_pair_lower_bound(args.x, args.y),
        "pairs": [(p.q1, p.q2, p.D) for p in pairs[:20]],
    }
    if certs:
        payload["certified_zero_free"] = sum(1 for c in certs.values() if c.count == 0)
    if args.out:
        cfg = {"cmd": "construct-positive", "x": args.x, "y": args.y,
               "wide": args.wide, "certify": args.certify, "eps": args.eps}
        t0 = time.time()
        with open(args.out, "w") as fh:
            for p in pairs:
                row = {
                    "schema_version": family.SCHEMA_VERSION,
                    "q1": p.q1, "q2": p.q2, "D": p.D, "y": p.y,
                    "residue_vector": list(p.residue_vector),
                }
                if args.certify:
                    c = certs[p.D]
                    row["certificate"] = {
                        "interval": list(c.interval),
                        "count": c.count,
                        "note": c.note,
                    }
                fh.write(json.dumps(row, sort_keys=True) + "\n")
        _write_manifest(args.out, cfg, len(pairs), t0)
    _emit(payload, args)
    return 0


_HANDLERS = {
    "scan-family": _cmd_scan_family,
    "sign-changes": _cmd_sign_changes,
    "legendre-trace": _cmd_legendre_trace,
    "fekete-zeros": _cmd_fekete_zeros,
    "fekete-eval": _cmd_fekete_eval,
    "theta-scan": _cmd_theta_scan,
    "identity-check": _cmd_identity_check,
    "random-model": _cmd_random_model,
    "discrepancy": _cmd_discrepancy,
    "moments": _cmd_moments,
    "orthogonality": _cmd_orthogonality,
    "jutila": _cmd_jutila,
    "construct-positive": _cmd_construct_positive,
}


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if exc.code is not None else 0
    try:
        return _HANDLERS[args.cmd](args)
    except (DomainError, CapabilityError, NumericalError, ResourceError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 3


def main() -> None:
    sys.exit(run())
