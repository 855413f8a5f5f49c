"""Experiment runner, benchmark suites and the one-dimensional certification sweep."""

import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import engine
from .certify import certify_trace
from .config import ExperimentConfig, build_problem, build_x0
from .objectives import asymmetric_piecewise, scaled_quadratic, scalar_huber
from .output import ensure_dir, render_svg, write_csv
from .policies import RestartPolicy
from .prng import Prng

THREADS_ENV = "RESTART_AGD_THREADS"
# decorrelates descent-lemma samples from the problem data stream
DESCENT_SEED_SALT = 0x5DEECE66D


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    problem: object
    trace: object
    report: object
    files: dict = field(default_factory=dict)


def _policy(cfg):
    return RestartPolicy.from_name(cfg.policy, gb_resets_schedule=cfg.gb_resets_schedule,
                                   allow_nonseparable=cfg.allow_nonseparable)


def run_experiment(cfg, problem=None, certify=True, store_iterates=False):
    """Build, run, certify and write whatever outputs ``cfg`` names.

    ``problem`` may pass in an already built objective for ``cfg`` (bench
    suites share one problem across policies).
    """
    cfg.validate()
    obj = build_problem(cfg) if problem is None else problem
    x0 = build_x0(cfg, obj.dim)
    trace = engine.run(obj, x0, _policy(cfg), cfg.schedule, cfg.max_iters, cfg.grad_tol,
                       store_iterates=store_iterates)
    report = None
    if certify:
        meta = {"problem": cfg.problem, "problem_params": obj.to_dict(), "policy": cfg.policy,
                "schedule": cfg.schedule, "seed": cfg.seed}
        report = certify_trace(trace, obj, Prng(cfg.seed ^ DESCENT_SEED_SALT),
                               cfg.descent_samples, meta=meta)
    files = {}
    if cfg.csv:
        write_csv(trace, cfg.csv)
        files["csv"] = cfg.csv
    if cfg.certificate and report is not None:
        _write_json(report.to_dict(), cfg.certificate)
        files["certificate"] = cfg.certificate
    if cfg.svg:
        render_svg([(cfg.policy, trace)], cfg.svg, title=cfg.problem)
        files["svg"] = cfg.svg
    return ExperimentResult(cfg, obj, trace, report, files)


def _write_json(doc, path):
    try:
        with open(path, "w") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True)
            fh.write("\n")
    except OSError as exc:
        raise OSError(exc.errno, f"cannot write JSON: {exc.strerror}", path) from exc


def max_workers(n_jobs):
    cap = os.environ.get(THREADS_ENV)
    limit = int(cap) if cap and cap.isdigit() and int(cap) > 0 else (os.cpu_count() or 1)
    return max(1, min(limit, n_jobs))


def _map(fn, items):
    items = list(items)
    workers = max_workers(len(items))
    if workers == 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


# --------------------------------------------------------------------------
# Benchmark suites

SUITES = {
    # random quadratic, n = 500
    "appendix-d": ({"problem": "quadratic"}, ("none", "grad-prev", "grad-next"), 1e-10),
    # Huber regression, m = 300, n = 50, tau = 0.5
    "appendix-e": ({"problem": "huber"}, ("none", "grad-prev", "grad-next"), 1e-8),
    # coupled Hinder-Lubin, m = 110, n = 100; started in the flat region,
    # where a single global restart test stalls
    "appendix-f": ({"problem": "hinder-lubin-mod", "x0": -2.0, "allow_nonseparable": True},
                   ("none", "grad-next", "coord"), 1e-8),
    # the separable original, from the default all-ones start
    "appendix-f-separable": ({"problem": "hinder-lubin"}, ("none", "grad-next", "coord"), 1e-8),
}


def suite_configs(suite, seed=42, max_iters=5000, **overrides):
    base, policies, _ = SUITES[suite]
    return [ExperimentConfig(**{**base, "seed": seed, "max_iters": max_iters, "policy": p,
                                **overrides})
            for p in policies]


def bench(suite, seed=42, out_dir=None, max_iters=5000, certify=False):
    """Run every policy of ``suite`` on one shared problem.

    Writes ``<suite>_<policy>.csv`` per policy, ``<suite>.svg`` and
    ``<suite>_summary.json`` into ``out_dir`` when given. Returns the
    summary dictionary.
    """
    if suite not in SUITES:
        raise KeyError(suite)
    target = SUITES[suite][2]
    cfgs = suite_configs(suite, seed, max_iters)
    obj = build_problem(cfgs[0].validate())
    ensure_dir(out_dir)
    for cfg in cfgs:
        if out_dir:
            cfg.csv = os.path.join(out_dir, f"{suite}_{cfg.policy}.csv")
    results = _map(lambda c: run_experiment(c, problem=obj, certify=certify), cfgs)
    summary = {
        "suite": suite, "seed": seed, "max_iters": max_iters, "target_gap": target,
        "problem": obj.to_dict(),
        "policies": {r.config.policy: {
            "iterations_to_target": r.trace.iterations_to_gap(target),
            "restarts": len(r.trace.restart_iterations),
            "final_gap": r.trace.records[-1].gap,
            "grad_evals": r.trace.grad_evals,
            "f_evals": r.trace.f_evals,
        } for r in results},
    }
    if out_dir:
        render_svg([(r.config.policy, r.trace) for r in results],
                   os.path.join(out_dir, f"{suite}.svg"), title=suite)
        _write_json(summary, os.path.join(out_dir, f"{suite}_summary.json"))
    summary["results"] = results
    return summary


# --------------------------------------------------------------------------
# One-dimensional certification sweep


def scalar_zoo():
    """One-dimensional problems whose declared ``L`` overshoots the curvature."""
    return [
        scaled_quadratic(1.0, 10.0),
        scaled_quadratic(0.25, 1.0, 1.5),
        scalar_huber(0.5, 4.0, -0.75),
        scalar_huber(2.0, 1.5, 3.0),
        asymmetric_piecewise(1.0, 9.0, 10.0, 0.5),
        asymmetric_piecewise(6.0, 0.5, 8.0, -2.0),
    ]


def sweep_starts(center, seeds, spread=5.0):
    """One start per seed: ``center + spread * N(0, 1)``."""
    return [float(center + spread * Prng(s).normal_array(1)[0]) for s in seeds]


def certify_scalar(obj, x0, max_iters=2000, schedule="linear"):
    trace = engine.run(obj, np.array([x0]), "grad-next", schedule, max_iters)
    return trace, certify_trace(trace, obj, meta={"problem": obj.to_dict(), "x0": x0})


def sweep(seeds=range(10), max_iters=2000, problems=None):
    """Certify keep-next gradient restarts on every (problem, start) pair.

    Returns a list of ``(problem, x0, seed, trace, report)`` tuples.
    """
    problems = scalar_zoo() if problems is None else problems
    jobs = [(p, x0, s) for p in problems
            for s, x0 in zip(seeds, sweep_starts(p.center, list(seeds)))]

    def one(job):
        p, x0, s = job
        trace, report = certify_scalar(p, x0, max_iters)
        return p, x0, s, trace, report

    return _map(one, jobs)
