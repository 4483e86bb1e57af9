"""Command-line front end.

    passivemin estimate --input data.csv [--output est.json] [--beta 2] [--alpha 1]
    passivemin simulate --config plan.json [--output report.json] [--emit-data obs.csv]
    passivemin rates    --beta 3 --dim 1
    passivemin inspect  --beta 2 --alpha 1 --dim 1 --k 1,10,100 --kernel quartic

Exit codes: 0 ok, 2 input error, 3 odd sample size without ``--drop-last``.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np
from scipy.stats import qmc

from . import io
from .harness import ExperimentPlan, emit_observations, rate_table, run_experiment, theoretical_exponent
from .kernel import FAMILIES, evaluate, make_kernel
from .minvalue import OddSampleSize, estimate_min_value
from .optimizer import Domain, Schedule, schedule_values

EXIT_OK, EXIT_INPUT, EXIT_CONTRACT = 0, 2, 3


class InputError(Exception):
    pass


def parse_domain(text: str, d: int) -> Domain:
    """``box:lo,hi`` (same bounds on every axis) or ``ball:r`` (centered at 0)."""
    try:
        shape, _, rest = text.partition(":")
        vals = [float(v) for v in rest.split(",")]
        if shape == "box" and len(vals) == 2:
            return Domain.box(vals[0], vals[1], d=d)
        if shape == "ball" and len(vals) == 1:
            return Domain.ball(np.zeros(d), vals[0])
    except ValueError as exc:
        raise InputError(f"bad --domain {text!r}: {exc}") from None
    raise InputError(f"bad --domain {text!r}; use box:lo,hi or ball:r")


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="passivemin", description=__doc__.split("\n")[0])
    sub = p.add_subparsers(dest="mode", required=True)

    def common(sp, with_seed=False):
        sp.add_argument("--beta", type=float)
        sp.add_argument("--alpha", type=float)
        sp.add_argument("--dim", type=int)
        sp.add_argument("--kernel", choices=FAMILIES)
        sp.add_argument("--output")
        if with_seed:
            sp.add_argument("--master-seed", type=int)

    e = sub.add_parser("estimate", help="estimate the minimum value from a CSV sample")
    common(e)
    e.add_argument("--input", required=True)
    e.add_argument("--config")
    e.add_argument("--domain")
    e.add_argument("--drop-last", action="store_true")
    e.add_argument("--stage1", choices=("average", "last"))

    s = sub.add_parser("simulate", help="run a Monte Carlo rate experiment")
    common(s, with_seed=True)
    s.add_argument("--config", required=True)
    s.add_argument("--emit-data")
    s.add_argument("--workers", type=int, default=1)

    r = sub.add_parser("rates", help="print the theoretical rate exponents")
    common(r)

    i = sub.add_parser("inspect", help="schedule table and kernel checks")
    common(i)
    i.add_argument("--k", default="1,2,5,10,100,1000")
    return p


def cmd_estimate(args) -> int:
    try:
        cfg = io.read_json(args.config) if args.config else {}
    except (OSError, ValueError) as exc:
        raise InputError(f"invalid config: {exc}") from None
    try:
        X, y = io.read_observations(args.input)
    except (io.CSVFormatError, OSError) as exc:
        raise InputError(str(exc)) from None
    d = X.shape[1]
    if args.dim is not None and args.dim != d:
        raise InputError(f"--dim {args.dim} does not match the data dimension {d}")
    beta = args.beta if args.beta is not None else cfg.get("beta", 2.0)
    alpha = args.alpha if args.alpha is not None else cfg.get("alpha", 1.0)
    family = args.kernel or cfg.get("kernel", "quartic")
    stage1 = args.stage1 or cfg.get("stage1", "average")
    if args.domain:
        domain = parse_domain(args.domain, d)
    elif "domain" in cfg:
        domain = Domain.from_dict(cfg["domain"], d=d)
    else:
        domain = Domain.box(X.min(axis=0), X.max(axis=0))
    if domain.d != d:
        raise InputError(f"domain dimension {domain.d} does not match data dimension {d}")
    if len(y) % 2:
        if not args.drop_last:
            raise OddSampleSize(f"n = {len(y)} is odd; pass --drop-last to discard the last row")
        X, y = X[:-1], y[:-1]
    try:
        sched = Schedule(beta, alpha, d)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    est = estimate_min_value(X, y, sched, domain, kernel=make_kernel(family, d), stage1=stage1)
    out = {
        "z_bar_m": est.z_stage1, "f_hat": est.f_hat, "n": est.n, "m": est.m,
        "params": {"beta": beta, "alpha": alpha, "h_mn": est.bandwidth,
                   "lambda_mn": est.ridge, "kernel": family, "stage1": stage1,
                   "domain": domain.to_dict()},
    }
    summary = f"f_hat={est.f_hat:.6g} at z={np.array2string(est.z_stage1, precision=6)} (n={est.n}, m={est.m})"
    if args.output:
        io.write_json(args.output, out)
        print(summary)
    else:
        sys.stdout.write(io.dumps(out))
        print(summary, file=sys.stderr)
    return EXIT_OK


def cmd_simulate(args) -> int:
    try:
        spec = io.read_json(args.config)
        for key, flag in (("master_seed", args.master_seed), ("beta", args.beta),
                          ("alpha", args.alpha), ("kernel", args.kernel)):
            if flag is not None:
                spec[key] = flag
        plan = ExperimentPlan.from_dict(spec)
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise InputError(f"invalid plan: {exc}") from None
    if args.dim is not None and args.dim != plan.scenario.d:
        raise InputError(f"--dim {args.dim} does not match the scenario dimension {plan.scenario.d}")
    report = run_experiment(plan, workers=args.workers)
    out = Path(args.output or "report.json")
    io.write_json(out, report.to_dict())
    report.write_csv(out.with_suffix(".csv"))
    if args.emit_data:
        X, y = emit_observations(plan)
        io.write_observations(args.emit_data, X, y)
    for t, fit in report.fits.items():
        if "slope" in fit:
            status = "PASS" if fit["passed"] else "FAIL"
            print(f"{t}: slope {fit['slope']:+.4f} (theory {-fit['theoretical_exponent']:+.4f}, "
                  f"band [{fit['band'][0]:+.3f}, {fit['band'][1]:+.3f}]) {status}")
        else:
            print(f"{t}: {len(plan.n_grid)} grid point(s), no slope fitted")
    for diag in report.diagnostics:
        print(f"diagnostic: {diag}", file=sys.stderr)
    return EXIT_OK


def cmd_rates(args) -> int:
    beta = args.beta if args.beta is not None else 2.0
    d = args.dim or 1
    if beta < 2:
        raise InputError("--beta must be >= 2")
    table = rate_table(beta, d)
    rows = {t: theoretical_exponent(t, beta, d) for t in
            ("minimizer_l2", "optimization", "minvalue_abs", "pointwise_sq")}
    print(f"beta={beta:g} d={d}")
    print(f"{'':10s}{'minimizer (quadratic risk)':>30s}{'minimum value':>16s}")
    for scheme in ("passive", "active"):
        print(f"{scheme:10s}{table[scheme]['minimizer_l2']:>30.4f}{table[scheme]['minvalue']:>16.4f}")
    print("implemented targets:")
    for t, e in rows.items():
        print(f"  {t:16s} n^-{e:.4f}")
    if args.output:
        io.write_json(args.output, {"beta": beta, "d": d, "table": table, "targets": rows})
    return EXIT_OK


def kernel_checks(family: str, d: int, n: int = 10_000, seed: int = 0) -> dict:
    """Support, unit mass (scrambled Sobol) and sampled Lipschitz ratio."""
    kern = make_kernel(family, d)
    rng = np.random.default_rng(seed)
    out = rng.normal(size=(n, d))
    out *= (1.0 + rng.uniform(1e-9, 1.0, size=(n, 1))) / np.linalg.norm(out, axis=1, keepdims=True)
    support_ok = bool(np.all(evaluate(kern, out) == 0.0))
    sob = qmc.Sobol(d, scramble=True, seed=seed).random(2**16)
    mass = float(np.mean(evaluate(kern, 2.0 * sob - 1.0)) * 2.0**d)
    a = rng.uniform(-1.2, 1.2, size=(n, d))
    b = a + rng.normal(scale=0.05, size=(n, d))
    ratio = np.abs(evaluate(kern, a) - evaluate(kern, b)) / np.linalg.norm(a - b, axis=1)
    lip = float(ratio.max())
    return {"family": kern.family, "d": d, "normalization": kern.normalization,
            "lipschitz_bound": kern.lipschitz_bound, "support_ok": support_ok,
            "mass": mass, "mass_ok": abs(mass - 1.0) <= 0.01,
            "empirical_lipschitz": lip, "lipschitz_ok": lip <= kern.lipschitz_bound * (1 + 1e-9)}


def cmd_inspect(args) -> int:
    beta = args.beta if args.beta is not None else 2.0
    alpha = args.alpha if args.alpha is not None else 1.0
    d = args.dim or 1
    try:
        ks = [int(v) for v in str(args.k).split(",") if v.strip()]
    except ValueError:
        raise InputError(f"--k must be a comma-separated list of integers, got {args.k!r}") from None
    if not ks or min(ks) < 1:
        raise InputError("--k values must be positive integers (rounds start at 1)")
    try:
        sched = Schedule(beta, alpha, d)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    print(f"schedule beta={beta:g} alpha={alpha:g} d={d} (degree {sched.degree})")
    print(f"{'k':>10s} {'h_k':>14s} {'lambda_k':>14s} {'eta_k':>14s}")
    table = []
    for k in ks:
        h, lam, eta = schedule_values(sched, k)
        table.append({"k": k, "h": h, "lambda": lam, "eta": eta})
        print(f"{k:>10d} {h:>14.8g} {lam:>14.8g} {eta:>14.8g}")
    family = args.kernel or "quartic"
    checks = kernel_checks(family, d)
    print(f"kernel {checks['family']} d={d}: c={checks['normalization']:.8g} "
          f"L_K={checks['lipschitz_bound']:.6g}")
    print(f"  support      {'ok' if checks['support_ok'] else 'FAIL'}")
    print(f"  mass         {checks['mass']:.5f} {'ok' if checks['mass_ok'] else 'FAIL'}")
    print(f"  lipschitz    {checks['empirical_lipschitz']:.5g} <= {checks['lipschitz_bound']:.5g} "
          f"{'ok' if checks['lipschitz_ok'] else 'FAIL'}")
    if args.output:
        io.write_json(args.output, {"schedule": table, "kernel": checks})
    return EXIT_OK


COMMANDS = {"estimate": cmd_estimate, "simulate": cmd_simulate, "rates": cmd_rates,
            "inspect": cmd_inspect}


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        return COMMANDS[args.mode](args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OddSampleSize as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONTRACT


if __name__ == "__main__":
    sys.exit(main())
