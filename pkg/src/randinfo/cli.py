"""Command-line front end.

Machine-readable results go to stdout (JSON) or to files under --out (CSV/JSON);
human-readable progress goes to stderr, so output can be piped.  Exit codes:
0 success, 1 usage error, 2 numerical failure, 3 acceptance-check failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import acceptance, bounds as bnd, concentration as conc
from .errors import NumericalError
from .experiments import (SweepConfig, dichotomy_experiment, regime_report,
                          run_sweep, write_csv, write_summary_json)
from .geometry import coordinate_radius, section_radius
from .randmat import sample
from .recovery import EstimatorSpec, optimal_radius, worst_case_error
from .sequences import SemiAxes

__all__ = ["main", "entrypoint"]


def _log(msg: str) -> None:
    print(msg, file=sys.stderr)


def _emit(payload: dict) -> None:
    print(json.dumps(payload, sort_keys=True))


def _load_sequence(args, m_override=None) -> SemiAxes:
    spec = json.loads(Path(args.sigma).read_text())
    m = m_override if m_override is not None else getattr(args, "m", None)
    if m is not None:
        if spec.get("family") == "explicit":
            raise SystemExit("--m cannot re-truncate an explicit sequence")
        spec["m"] = m
    if "m" not in spec and spec.get("family") != "explicit":
        raise SystemExit("sequence spec needs a truncation dimension m (or pass --m)")
    return SemiAxes.from_spec(spec)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="randinfo",
        description="Radii of random ellipsoid sections, recovery errors, "
                    "analytic bounds and Monte Carlo experiments.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, *, sigma=True, seed=True):
        if sigma:
            p.add_argument("--sigma", required=True, help="path to a sequence spec JSON")
            p.add_argument("--m", type=int, help="override the truncation dimension")
        if seed:
            p.add_argument("--seed", type=int, default=1)
        p.add_argument("--dense-cap", type=int, default=2048, dest="dense_cap")
        p.add_argument("--tol", type=float, default=1e-10)

    p = sub.add_parser("radius", help="section radius of one realization")
    common(p)
    p.add_argument("--n", type=int, required=True)

    p = sub.add_parser("coord-radius", help="coordinate radius of one realization")
    common(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, default=1)

    p = sub.add_parser("error", help="worst-case error of the least-squares estimator")
    common(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, help="coordinate budget (default floor(n/2))")

    p = sub.add_parser("bound", help="evaluate an analytic bound")
    common(p, seed=True)
    p.add_argument("--name", required=True,
                   choices=["ub_main", "ub_exp", "lb_main", "realization_ub",
                            "bvh_threshold", "gordon_an", "mstar_section", "elementary_lb"])
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int)
    p.add_argument("--eps", type=float, default=0.5)
    p.add_argument("--c", type=float, default=1.0)
    p.add_argument("--s", type=float, default=1.0)
    p.add_argument("--gamma", type=float, default=0.5)
    p.add_argument("--alpha", type=float, help="exponent for elementary_lb")
    p.add_argument("--samples", type=int, default=4096,
                   help="Monte Carlo samples for the mean-width estimate")

    p = sub.add_parser("concentration", help="empirical check of a tail inequality")
    p.add_argument("--check", required=True,
                   choices=["laurent_massart", "davidson_szarek", "szarek",
                            "bvh", "smin_basic", "gordon"])
    p.add_argument("--sigma", help="sequence spec (bvh check)")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, help="weight-vector length (equal weights)")
    p.add_argument("--k", type=int, default=0)
    p.add_argument("--t", type=float, default=0.1)
    p.add_argument("--c", type=float, default=1.0)
    p.add_argument("--c-grid", default="", dest="c_grid",
                   help="comma-separated levels for the gordon check")
    p.add_argument("--delta", type=float, default=0.5)
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--out", help="also write the report JSON into this directory")

    p = sub.add_parser("mstar", help="Monte Carlo half mean width of the ellipsoid")
    common(p)
    p.add_argument("--samples", type=int, default=65536)

    p = sub.add_parser("sweep", help="run a Monte Carlo sweep from a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--trials", type=int, help="override the config's trial count")
    p.add_argument("--seed", type=int, help="override the config's master seed")
    p.add_argument("--m", type=int, help="override a fixed-m rule")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--dense-cap", type=int, dest="dense_cap")
    p.add_argument("--tol", type=float)
    p.add_argument("--name", default="sweep", help="basename for the output files")

    p = sub.add_parser("dichotomy", help="usefulness frequency as m grows")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--beta", type=float, default=0.0)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m-list", required=True, dest="m_list",
                   help="comma-separated, strictly increasing truncations")
    p.add_argument("--eps", type=float, default=0.5)
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--out")
    p.add_argument("--dense-cap", type=int, default=64, dest="dense_cap")
    p.add_argument("--tol", type=float, default=1e-10)

    p = sub.add_parser("regimes", help="run the regime sweeps and summarize them")
    p.add_argument("--out", required=True)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--critical-m", type=int, default=1 << 17, dest="critical_m")

    p = sub.add_parser("selftest", help="run the acceptance suite end-to-end")
    p.add_argument("--criteria", help="comma-separated criterion ids (default all)")
    p.add_argument("--threads", type=int, default=2)

    return parser


def _cmd_radius(args) -> dict:
    seq = _load_sequence(args)
    G = sample(args.seed, args.n, seq.m)
    sr = section_radius(seq, G, dense_cap=args.dense_cap, tol=args.tol)
    out = sr.to_json()
    out.update(seed=args.seed, sigma_np1=optimal_radius(seq, args.n),
               sigma_1=seq.sigma_value(1))
    _log(f"radius {sr.value:.6g} in [{out['sigma_np1']:.6g}, {out['sigma_1']:.6g}] "
         f"(n={args.n}, m={seq.m}, {sr.method}, seed={args.seed})")
    return out


def _cmd_coord_radius(args) -> dict:
    seq = _load_sequence(args)
    G = sample(args.seed, args.n, seq.m)
    val = coordinate_radius(seq, G, args.k)
    _log(f"coordinate radius {val:.6g} (k={args.k}, n={args.n}, m={seq.m}, "
         f"seed={args.seed})")
    return {"coord_radius": val, "k": args.k, "n": args.n, "m": seq.m,
            "seed": args.seed, "sigma_k": seq.sigma_value(args.k)}


def _cmd_error(args) -> dict:
    seq = _load_sequence(args)
    k = args.k if args.k is not None else max(1, args.n // 2)
    G = sample(args.seed, args.n, seq.m)
    err = worst_case_error(seq, G, EstimatorSpec(k), tol=args.tol)
    _log(f"estimator worst-case error {err:.6g} (k={k}, n={args.n}, m={seq.m}, "
         f"seed={args.seed})")
    return {"error_an": err, "k": k, "n": args.n, "m": seq.m, "seed": args.seed,
            "sigma_np1": optimal_radius(seq, args.n)}


def _cmd_bound(args) -> dict:
    if args.name == "gordon_an":
        return {"name": "gordon_an", "n": args.n, "value": bnd.gordon_an(args.n)}
    seq = _load_sequence(args)
    if args.name == "ub_main":
        return bnd.ub_main(seq, args.n).to_json()
    if args.name == "ub_exp":
        return bnd.ub_exponential(seq, args.n, args.c, args.s).to_json()
    if args.name == "lb_main":
        return bnd.lb_main(seq, args.n, args.eps).to_json()
    if args.name == "bvh_threshold":
        k = args.k if args.k is not None else max(1, args.n // 2)
        return {"name": "bvh_threshold", "n": args.n, "k": k, "c": args.c,
                "value": bnd.bvh_threshold(seq, args.n, k, args.c)}
    if args.name == "realization_ub":
        k = args.k if args.k is not None else max(1, args.n // 2)
        G = sample(args.seed, args.n, seq.m)
        return bnd.realization_ub(seq, G, k).to_json()
    if args.name == "mstar_section":
        k = args.k if args.k is not None else max(1, args.n // 2)
        rho = bnd.rho_for_k(seq, k)
        est, se = bnd.mstar_capped_estimate(seq, k, rho, args.samples, args.seed)
        report = bnd.mstar_section_bound(seq, args.n, args.gamma, k, est)
        out = report.to_json()
        out["mstar_rho_std_error"] = se
        return out
    if args.name == "elementary_lb":
        if args.alpha is None:
            raise SystemExit("elementary_lb needs --alpha in (0, 1/2)")
        value = bnd.elementary_lb(seq.m, args.n, args.eps,
                                  seq.sigma_value(seq.m), args.alpha)
        return {"name": "elementary_lb", "value": value, "confidence": 1 - args.eps,
                "n": args.n, "m": seq.m}
    raise SystemExit(f"unknown bound {args.name}")


def _cmd_concentration(args) -> dict:
    if args.check == "bvh":
        if not args.sigma:
            raise SystemExit("the bvh check needs --sigma")
        seq = _load_sequence(args, m_override=args.m)
        check = conc.check_bvh(seq, args.n, args.k, args.c, args.trials, args.seed)
        payload = {"checks": [check.to_json()]}
    elif args.check == "laurent_massart":
        if not args.m:
            raise SystemExit("laurent_massart needs --m (weight-vector length)")
        lo, hi = conc.check_laurent_massart(np.ones(args.m), args.delta,
                                            args.trials, args.seed)
        payload = {"checks": [lo.to_json(), hi.to_json()]}
    elif args.check == "davidson_szarek":
        check = conc.check_davidson_szarek(args.n, args.trials, args.seed)
        payload = {"checks": [check.to_json()]}
    elif args.check == "szarek":
        check = conc.check_szarek(args.n, args.t, args.trials, args.seed)
        payload = {"checks": [check.to_json()]}
    elif args.check == "smin_basic":
        if not args.m:
            raise SystemExit("smin_basic needs --m (weight-vector length)")
        check = conc.check_smin_basic(np.ones(args.m), args.n, args.delta,
                                      args.trials, args.seed)
        payload = {"checks": [check.to_json()]}
    else:
        if not args.m:
            raise SystemExit("the gordon check needs --m (weight-vector length)")
        grid = [float(v) for v in args.c_grid.split(",") if v] or [args.c]
        results = conc.check_gordon_comparison(np.ones(args.m), args.n, grid,
                                               args.trials, args.seed)
        payload = {"checks": [chk.to_json() for _, chk in results]}
    if args.out:
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        path = out_dir / f"concentration_{args.check}.json"
        path.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n")
        _log(f"wrote {path}")
    return payload


def _cmd_mstar(args) -> dict:
    seq = _load_sequence(args)
    est, se = bnd.mstar_estimate(seq, args.samples, args.seed)
    _log(f"half mean width {est:.6g} +- {se:.2g} ({args.samples} samples)")
    return {"estimate": est, "std_error": se, "samples": args.samples, "m": seq.m}


def _apply_sweep_overrides(config: SweepConfig, args) -> SweepConfig:
    if args.trials is not None:
        config.trials = args.trials
    if args.seed is not None:
        config.master_seed = args.seed
    if args.m is not None:
        if config.m_rule.get("kind") != "fixed":
            raise SystemExit("--m only overrides a fixed-m rule")
        config.m_rule = {"kind": "fixed", "m": args.m}
    if args.dense_cap is not None:
        config.dense_cap = args.dense_cap
    if args.tol is not None:
        config.tol = args.tol
    return config


def _cmd_sweep(args) -> dict:
    config = _apply_sweep_overrides(SweepConfig.from_json(args.config), args)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    records, summaries = run_sweep(config, threads=args.threads, log=_log)
    csv_path = write_csv(records, out_dir / f"{args.name}.csv")
    summary_path = write_summary_json(summaries, config.sequence,
                                      out_dir / f"{args.name}_summary.json")
    return {"csv": str(csv_path), "summary": str(summary_path),
            "records": len(records)}


def _cmd_dichotomy(args) -> dict:
    m_list = [int(v) for v in args.m_list.split(",") if v]
    report = dichotomy_experiment(args.alpha, args.beta, args.n, m_list, args.eps,
                                  args.trials, args.seed, dense_cap=args.dense_cap,
                                  tol=args.tol)
    payload = report.to_json()
    if args.out:
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        path = out_dir / "dichotomy.json"
        path.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n")
        _log(f"wrote {path}")
    return payload


_REGIME_CASES = {
    "alpha_quarter": {
        "sequence": {"family": "polynomial", "alpha": 0.25, "beta": 0.0},
        "n_list": [1, 5, 10], "m_rule": {"kind": "fixed", "m": 4096}},
    "alpha_half_critical": {
        "sequence": {"family": "polynomial", "alpha": 0.5, "beta": 1.0},
        "n_list": [16, 32, 64], "m_rule": None},
    "alpha_one": {
        "sequence": {"family": "polynomial", "alpha": 1.0, "beta": 0.0},
        "n_list": [8, 16, 32, 64], "m_rule": {"kind": "multiple", "c": 64}},
    "exponential_half": {
        "sequence": {"family": "exponential", "a": 0.5},
        "n_list": list(range(5, 26)), "m_rule": {"kind": "fixed", "m": 96},
        "k_rule": {"kind": "full"}},
}


def _cmd_regimes(args) -> dict:
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    cases = {}
    for label, case in _REGIME_CASES.items():
        m_rule = case["m_rule"] or {"kind": "fixed", "m": args.critical_m}
        config = SweepConfig(sequence=case["sequence"], n_list=case["n_list"],
                             m_rule=m_rule, trials=args.trials,
                             master_seed=args.seed, dense_cap=256,
                             estimator_k_rule=case.get("k_rule", {"kind": "half"}))
        _log(f"regime case {label}: n_list={case['n_list']}")
        records, summaries = run_sweep(config, threads=args.threads, log=_log)
        write_csv(records, out_dir / f"sweep_{label}.csv")
        write_summary_json(summaries, config.sequence,
                           out_dir / f"summary_{label}.json")
        cases[label] = {"sequence": config.sequence,
                        "cells": [s.to_json() for s in summaries]}
    report = regime_report(cases)
    path = out_dir / "regimes.json"
    path.write_text(json.dumps(report, sort_keys=True, indent=2) + "\n")
    _log(f"wrote {path}")
    return report


def _cmd_selftest(args) -> tuple[dict, bool]:
    ids = [int(v) for v in args.criteria.split(",")] if args.criteria else None
    results = acceptance.run_criteria(ids, threads=args.threads, log=_log)
    ok = all(r.passed for r in results)
    payload = {"passed": ok,
               "criteria": [{"id": r.cid, "name": r.name, "passed": r.passed,
                             "details": r.details, "seconds": round(r.seconds, 2)}
                            for r in results]}
    return payload, ok


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1
    try:
        if args.command == "radius":
            _emit(_cmd_radius(args))
        elif args.command == "coord-radius":
            _emit(_cmd_coord_radius(args))
        elif args.command == "error":
            _emit(_cmd_error(args))
        elif args.command == "bound":
            _emit(_cmd_bound(args))
        elif args.command == "concentration":
            _emit(_cmd_concentration(args))
        elif args.command == "mstar":
            _emit(_cmd_mstar(args))
        elif args.command == "sweep":
            _emit(_cmd_sweep(args))
        elif args.command == "dichotomy":
            _emit(_cmd_dichotomy(args))
        elif args.command == "regimes":
            _emit(_cmd_regimes(args))
        elif args.command == "selftest":
            payload, ok = _cmd_selftest(args)
            _emit(payload)
            return 0 if ok else 3
        return 0
    except SystemExit as exc:
        _log(str(exc))
        return 1
    except (ValueError, FileNotFoundError, KeyError, json.JSONDecodeError) as exc:
        _log(f"usage error: {exc}")
        return 1
    except NumericalError as exc:
        _log(f"numerical failure: {exc}")
        return 2


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
