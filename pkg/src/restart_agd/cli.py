"""Command-line entry point: ``restart-agd {run,certify,bench,sweep}``."""

import argparse
import json
import os
import sys
import time

from .config import PROBLEMS, ExperimentConfig
from .errors import ConfigError, RestartAGDError
from .experiments import SUITES, bench, run_experiment, sweep
from .iterates import SCHEDULES
from .policies import CLI_NAMES

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_CONFIG = 2
EXIT_CERTIFICATE = 3

_PROBLEM_FIELDS = ("n", "m", "tau", "delta", "alpha", "gamma", "c", "c_right", "L", "center")

# flag dest -> ExperimentConfig field
_FIELD_FLAGS = {
    "problem": "problem", "n": "n", "m": "m", "tau": "tau", "delta": "delta",
    "alpha": "alpha", "gamma": "gamma", "c": "c", "c_right": "c_right", "L": "L",
    "center": "center", "seed": "seed", "x0": "x0", "x0_seed": "x0_seed",
    "policy": "policy", "schedule": "schedule", "iters": "max_iters",
    "grad_tol": "grad_tol", "descent_samples": "descent_samples", "csv": "csv",
    "certificate": "certificate", "svg": "svg",
}


def _x0(text):
    if text in ("ones", "zeros", "normal"):
        return text
    try:
        parts = [float(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(
            "expected ones, zeros, normal, a number or a comma-separated list") from None
    return parts[0] if len(parts) == 1 else parts


def _experiment_flags(p):
    g = p.add_argument_group("experiment")
    g.add_argument("--config", help="flat JSON config file; other flags override it")
    g.add_argument("--problem", choices=PROBLEMS)
    for name in ("n", "m", "seed", "x0-seed", "descent-samples"):
        g.add_argument(f"--{name}", type=int)
    for name in ("tau", "delta", "alpha", "gamma", "c", "c-right", "L", "center", "grad-tol"):
        g.add_argument(f"--{name}", type=float)
    g.add_argument("--x0", type=_x0, help="ones, zeros, normal, a number or a list a,b,...")
    g.add_argument("--policy", choices=CLI_NAMES)
    g.add_argument("--schedule", choices=SCHEDULES)
    g.add_argument("--iters", type=int, help="iteration budget")
    g.add_argument("--allow-nonseparable", action="store_true", default=None,
                   help="let coord run on a non-separable objective")
    g.add_argument("--gb-reset", action="store_true", default=None,
                   help="reset the schedule on Giselsson-Boyd restarts")
    g.add_argument("--csv")
    g.add_argument("--certificate")
    g.add_argument("--svg")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="restart-agd", description="Accelerated gradient descent with adaptive restarts.")
    sub = parser.add_subparsers(dest="command", required=True)
    _experiment_flags(sub.add_parser("run", help="run one experiment"))
    _experiment_flags(sub.add_parser("certify", help="run and certify; exit 3 on any failure"))
    b = sub.add_parser("bench", help="benchmark suites, one CSV per policy and one SVG")
    b.add_argument("--suite", choices=tuple(SUITES) + ("all",), default="all")
    b.add_argument("--seed", type=int, default=42)
    b.add_argument("--out", default="results")
    b.add_argument("--iters", type=int, default=5000)
    s = sub.add_parser("sweep", help="one-dimensional certification sweep")
    s.add_argument("--seeds", type=int, default=10, help="number of seeds per problem")
    s.add_argument("--iters", type=int, default=2000)
    s.add_argument("--out", help="write a JSON summary here")
    return parser


def config_from_args(args):
    doc = {}
    if args.config:
        doc = ExperimentConfig.load(args.config).to_dict()
        if args.problem is not None and args.problem != doc.get("problem"):
            # sizes the file filled in belong to its own problem type
            for key in _PROBLEM_FIELDS:
                doc.pop(key, None)
    for dest, fld in _FIELD_FLAGS.items():
        value = getattr(args, dest)
        if value is not None:
            doc[fld] = value
    if args.allow_nonseparable:
        doc["allow_nonseparable"] = True
    if args.gb_reset:
        doc["gb_resets_schedule"] = True
    return ExperimentConfig.from_dict(doc).validate()


def _print_report(report, out):
    for c in report.checks:
        if c.skipped:
            status = "skip"
        else:
            status = "pass" if c.passed else "FAIL"
        margin = "" if c.worst_margin is None else f"  worst_margin={c.worst_margin:.3e} at k={c.worst_iteration}"
        print(f"  {status:4s} {c.name}{margin}", file=out)


def _cmd_run(args, certify):
    cfg = config_from_args(args)
    res = run_experiment(cfg)
    last = res.trace.records[-1]
    gap = "n/a" if last.gap is None else f"{last.gap:.6e}"
    print(f"{cfg.problem} policy={cfg.policy} schedule={cfg.schedule} iterations={last.k} "
          f"termination={res.trace.termination} restarts={len(res.trace.restart_iterations)} "
          f"final_gap={gap}")
    for kind, path in res.files.items():
        print(f"wrote {kind}: {path}")
    if certify:
        _print_report(res.report, sys.stdout)
        print("certificate:", "pass" if res.report.overall_pass else "FAIL")
        if not res.report.overall_pass:
            return EXIT_CERTIFICATE
    return EXIT_OK


def _cmd_bench(args):
    suites = list(SUITES) if args.suite == "all" else [args.suite]
    if args.iters < 1:
        raise ConfigError("iters", "must be a positive integer")
    for suite in suites:
        t0 = time.perf_counter()
        summary = bench(suite, seed=args.seed, out_dir=args.out, max_iters=args.iters)
        print(f"{suite} ({time.perf_counter() - t0:.1f} s), target gap {summary['target_gap']:g}")
        for policy, row in summary["policies"].items():
            hit = row["iterations_to_target"]
            print(f"  {policy:10s} iterations_to_target={'not reached' if hit is None else hit}"
                  f"  restarts={row['restarts']}")
    print(f"outputs in {os.path.abspath(args.out)}")
    return EXIT_OK


def _cmd_sweep(args):
    if args.seeds < 1:
        raise ConfigError("seeds", "must be a positive integer")
    if args.iters < 1:
        raise ConfigError("iters", "must be a positive integer")
    rows = []
    for obj, x0, seed, trace, report in sweep(range(args.seeds), args.iters):
        failed = [c.name for c in report.failures()]
        rows.append({"problem": obj.to_dict(), "seed": seed, "x0": x0,
                     "restarts": len(trace.restart_iterations), "overall_pass": not failed,
                     "failed_checks": failed})
        if failed:
            print(f"FAIL {obj!r} seed={seed} x0={x0:.6g}: {', '.join(failed)}")
    n_fail = sum(not r["overall_pass"] for r in rows)
    print(f"{len(rows) - n_fail}/{len(rows)} traces certified")
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(rows, fh, indent=2, sort_keys=True)
            fh.write("\n")
    return EXIT_CERTIFICATE if n_fail else EXIT_OK


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # usage errors exit 2, --help exits 0
        return exc.code
    try:
        if args.command in ("run", "certify"):
            return _cmd_run(args, certify=args.command == "certify")
        if args.command == "bench":
            return _cmd_bench(args)
        return _cmd_sweep(args)
    except ConfigError as exc:
        parser.print_usage(sys.stderr)
        print(f"restart-agd: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (RestartAGDError, ValueError) as exc:
        # ArgumentError and DomainError derive from ValueError
        print(f"restart-agd: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG if isinstance(exc, ValueError) else EXIT_RUNTIME
    except OSError as exc:
        print(f"restart-agd: I/O error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
