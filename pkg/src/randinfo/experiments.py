"""Seeded Monte Carlo harness: sweeps over n, the square-summability dichotomy,
regime summaries, and persistence.

Reproducibility contract: every trial's realization derives from
hash(master_seed, n, trial_index) alone, aggregation is sorted by
(n, trial_index) before writing, and the canonical CSV/JSON outputs are
byte-identical across re-runs and across worker-thread counts.  Because of
that contract the runtime_ms column of the canonical CSV is written as 0;
wall-clock timings go to the stderr log instead.
"""

from __future__ import annotations

import json
import math
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import bounds as bnd
from .errors import ConvergenceError, NumericalError, RankDeficiencyError
from .geometry import coordinate_radius, section_radius
from .randmat import sample
from .recovery import EstimatorSpec, optimal_radius, worst_case_error
from .sequences import SemiAxes

__all__ = [
    "SweepConfig", "TrialRecord", "SweepSummary", "CSV_HEADER",
    "trial_seed", "run_sweep", "write_csv", "write_summary_json",
    "dichotomy_experiment", "regime_report",
]

CSV_HEADER = ("seed,n,m,trial,radius,sigma_np1,error_an,k_used,"
              "ub_main,ub_exp,lb_main,realization_ub_holds,runtime_ms")

_MASK64 = (1 << 64) - 1


def _splitmix64(z: int) -> int:
    z = (z + 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def trial_seed(master_seed: int, n: int, trial: int) -> int:
    """Stable 64-bit per-trial seed; independent of scheduling order."""
    h = _splitmix64(master_seed & _MASK64)
    h = _splitmix64(h ^ _splitmix64(n))
    h = _splitmix64(h ^ _splitmix64(trial))
    return h


def resolve_m(rule: dict, n: int) -> int:
    kind = rule.get("kind")
    if kind == "fixed":
        m = int(rule["m"])
    elif kind == "multiple":
        m = int(round(rule["c"] * n))
    elif kind == "power":
        m = int(round(n ** rule["p"]))
    else:
        raise ValueError(f"unknown m rule {rule!r}")
    return max(m, 1)


def resolve_k(rule: dict, n: int) -> int:
    kind = rule.get("kind")
    if kind == "half":
        return max(1, n // 2) if n > 0 else 0
    if kind == "full":
        return n
    if kind == "fraction":
        r = float(rule["r"])
        if not (0 < r <= 1):
            raise ValueError("fraction rule needs r in (0, 1]")
        return min(n, max(1, round(r * n))) if n > 0 else 0
    raise ValueError(f"unknown k rule {rule!r}")


@dataclass
class SweepConfig:
    sequence: dict
    n_list: list
    m_rule: dict
    trials: int
    master_seed: int
    estimator_k_rule: dict = field(default_factory=lambda: {"kind": "half"})
    outputs: dict = field(default_factory=dict)
    out_path: str | None = None
    eps_lower: float = 0.5
    ub_exp_c: float = 1.0
    ub_exp_s: float = 10.0
    dense_cap: int = 2048
    tol: float = 1e-10

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        defaults = {"radius": True, "coord_radius": False, "error_an": True, "bounds": True}
        defaults.update(self.outputs)
        self.outputs = defaults
        for n in self.n_list:
            if n < 0:
                raise ValueError("n must be >= 0")
            if n >= resolve_m(self.m_rule, n):
                raise ValueError(f"n={n} must be smaller than its truncation m")

    @classmethod
    def from_json(cls, source) -> "SweepConfig":
        data = json.loads(Path(source).read_text()) if not isinstance(source, dict) else dict(source)
        return cls(**data)


@dataclass
class TrialRecord:
    seed: int
    n: int
    m: int
    trial: int
    radius: float
    sigma_np1: float
    error_an: float
    k_used: int
    ub_main: float
    ub_exp: float
    lb_main: float
    realization_ub_holds: str       # "true" | "false" | "na"
    runtime_ms: int = 0             # canonical output is deterministic: always 0
    failed: bool = False
    coord_radius: float = math.nan

    def csv_row(self) -> str:
        cells = [str(self.seed), str(self.n), str(self.m), str(self.trial),
                 repr(self.radius), repr(self.sigma_np1), repr(self.error_an),
                 str(self.k_used), repr(self.ub_main), repr(self.ub_exp),
                 repr(self.lb_main), self.realization_ub_holds, str(self.runtime_ms)]
        return ",".join(cells)


@dataclass
class SweepSummary:
    n: int
    m: int
    trials: int
    mean_radius: float
    median_radius: float
    q05: float
    q95: float
    mean_error: float
    ratio_opt: float
    ratio_log: float
    tail_ratio: float
    sigma_np1: float
    failures: int = 0

    def to_json(self) -> dict:
        return {
            "n": self.n, "m": self.m, "trials": self.trials,
            "mean_radius": self.mean_radius, "median_radius": self.median_radius,
            "q05": self.q05, "q95": self.q95, "mean_error": self.mean_error,
            "ratio_opt": self.ratio_opt, "ratio_log": self.ratio_log,
            "tail_ratio": self.tail_ratio, "sigma_np1": self.sigma_np1,
            "failures": self.failures,
        }


def _cell_bounds(seq: SemiAxes, n: int, config: SweepConfig):
    if not config.outputs["bounds"] or n < 1:
        return math.nan, math.nan, math.nan
    ub = bnd.ub_main(seq, n).rhs
    ub_exp = bnd.ub_exponential(seq, n, config.ub_exp_c, config.ub_exp_s).rhs
    lb = bnd.lb_main(seq, n, config.eps_lower).rhs
    return ub, ub_exp, lb


def _run_trial(seq: SemiAxes, n: int, m: int, trial: int, config: SweepConfig,
               cell) -> tuple[TrialRecord, float]:
    t0 = time.perf_counter()
    seed = trial_seed(config.master_seed, n, trial)
    ub, ub_exp, lb = cell
    k = resolve_k(config.estimator_k_rule, n)
    record = TrialRecord(seed=seed, n=n, m=m, trial=trial, radius=math.nan,
                         sigma_np1=optimal_radius(seq, n), error_an=math.nan,
                         k_used=k, ub_main=ub, ub_exp=ub_exp, lb_main=lb,
                         realization_ub_holds="na")
    try:
        G = sample(seed, n, m)
        if config.outputs["radius"]:
            sr = section_radius(seq, G, dense_cap=config.dense_cap, tol=config.tol)
            record.radius = sr.value
        if config.outputs["coord_radius"]:
            record.coord_radius = coordinate_radius(seq, G, 1) if n < m else 0.0
        if config.outputs["error_an"]:
            record.error_an = worst_case_error(seq, G, EstimatorSpec(k), tol=config.tol)
            if 1 <= k <= n:
                try:
                    rep = bnd.realization_ub(seq, G, k, lhs=record.error_an)
                    record.realization_ub_holds = "true" if rep.holds else "false"
                except RankDeficiencyError:
                    record.realization_ub_holds = "na"
    except NumericalError:
        record.failed = True
    return record, time.perf_counter() - t0


def run_sweep(config: SweepConfig, threads: int = 1,
              log=None) -> tuple[list[TrialRecord], list[SweepSummary]]:
    """Run trials x n_list cells; deterministic given master_seed regardless of
    the worker-thread count.  Aborts when more than 1% of trials fail."""
    log = log if log is not None else (lambda msg: print(msg, file=sys.stderr))
    tasks = []
    seqs = {}
    for n in config.n_list:
        m = resolve_m(config.m_rule, n)
        if m not in seqs:
            spec = dict(config.sequence)
            if spec.get("family") != "explicit":
                spec["m"] = m
            seqs[m] = SemiAxes.from_spec(spec)
            if seqs[m].m != m:
                raise ValueError("explicit sequences need a fixed m rule matching their length")
        cell = _cell_bounds(seqs[m], n, config)
        for trial in range(config.trials):
            tasks.append((n, m, trial, cell))

    results = {}
    timings = {}

    def work(task):
        n, m, trial, cell = task
        return (n, trial), _run_trial(seqs[m], n, m, trial, config, cell)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            for key, (rec, secs) in pool.map(work, tasks):
                results[key] = rec
                timings[key] = secs
    else:
        for task in tasks:
            key, (rec, secs) = work(task)
            results[key] = rec
            timings[key] = secs

    records = [results[key] for key in sorted(results)]
    failures = sum(r.failed for r in records)
    if failures > 0.01 * len(records):
        raise ConvergenceError(
            f"{failures}/{len(records)} trials failed to converge; aborting sweep")

    summaries = []
    for n in config.n_list:
        m = resolve_m(config.m_rule, n)
        cell_records = [r for r in records if r.n == n and not r.failed]
        cell_time = sum(timings[(n, t)] for t in range(config.trials))
        summaries.append(_summarize(seqs[m], n, m, cell_records,
                                    failures=config.trials - len(cell_records)))
        log(f"  n={n} m={m}: {len(cell_records)} trials, "
            f"mean radius {summaries[-1].mean_radius:.6g}, {cell_time:.1f}s")
    return records, summaries


def _summarize(seq: SemiAxes, n: int, m: int, records, failures: int = 0) -> SweepSummary:
    radii = np.array([r.radius for r in records], dtype=float)
    errors = np.array([r.error_an for r in records], dtype=float)
    s_np1 = optimal_radius(seq, n)
    mean_radius = float(np.nanmean(radii)) if radii.size else math.nan
    start = max(n // 4, 1) if n >= 1 else 1
    tail_used = seq.tail_sq(start - 1)
    neglected = seq.neglected_tail_sq()
    tail_ratio = 0.0 if neglected == 0 else (math.inf if tail_used == 0 else neglected / tail_used)
    return SweepSummary(
        n=n, m=m, trials=len(records),
        mean_radius=mean_radius,
        median_radius=float(np.nanmedian(radii)) if radii.size else math.nan,
        q05=float(np.nanquantile(radii, 0.05)) if radii.size else math.nan,
        q95=float(np.nanquantile(radii, 0.95)) if radii.size else math.nan,
        mean_error=float(np.nanmean(errors)) if errors.size and not np.all(np.isnan(errors)) else math.nan,
        ratio_opt=mean_radius / s_np1 if s_np1 > 0 else math.inf,
        ratio_log=mean_radius / (s_np1 * math.sqrt(math.log(n + 1.0))) if n >= 1 and s_np1 > 0 else math.inf,
        tail_ratio=tail_ratio,
        sigma_np1=s_np1,
        failures=failures)


# ---------------------------------------------------------------------------
# Persistence: canonical, byte-stable CSV and JSON.
# ---------------------------------------------------------------------------

def csv_bytes(records) -> bytes:
    lines = [CSV_HEADER]
    lines.extend(r.csv_row() for r in records)
    return ("\n".join(lines) + "\n").encode()


def write_csv(records, path) -> Path:
    path = Path(path)
    path.write_bytes(csv_bytes(records))
    return path


def summary_json_bytes(summaries, sequence_spec: dict) -> bytes:
    doc = {"sequence": sequence_spec, "cells": [s.to_json() for s in summaries]}
    return (json.dumps(doc, sort_keys=True, indent=2) + "\n").encode()


def write_summary_json(summaries, sequence_spec: dict, path) -> Path:
    path = Path(path)
    path.write_bytes(summary_json_bytes(summaries, sequence_spec))
    return path


# ---------------------------------------------------------------------------
# Dichotomy experiment: random information is useless below n_zero.
# ---------------------------------------------------------------------------

@dataclass
class DichotomyReport:
    alpha: float
    beta: float
    n: int
    eps: float
    trials: int
    master_seed: int
    rows: list = field(default_factory=list)  # {"m", "n_zero", "threshold", "frequency"}

    def frequencies(self) -> list:
        return [row["frequency"] for row in self.rows]

    def to_json(self) -> dict:
        return {"alpha": self.alpha, "beta": self.beta, "n": self.n, "eps": self.eps,
                "trials": self.trials, "master_seed": self.master_seed, "rows": self.rows}


def dichotomy_experiment(alpha: float, beta: float, n: int, m_list, eps: float,
                         trials: int, seed: int, *, dense_cap: int = 2048,
                         tol: float = 1e-10) -> DichotomyReport:
    """Frequency of R_n >= sigma_1 (1 - eps) as the truncation m grows.

    Realizations are nested across m (trial seeds do not depend on m), so each
    trial's radius is non-decreasing in m and the frequency table is
    monotone by construction.
    """
    m_list = [int(m) for m in m_list]
    if any(b <= a for a, b in zip(m_list, m_list[1:])):
        raise ValueError("m_list must be strictly increasing")
    if not (0 < eps <= 1):
        raise ValueError("eps must lie in (0, 1]")
    if n >= m_list[0]:
        raise ValueError("need n < every m in m_list")
    seqs = {m: SemiAxes.polynomial(alpha, beta, m=m) for m in m_list}
    sigma_1 = seqs[m_list[0]].sigma_value(1)
    threshold = (1.0 - eps) * sigma_1
    hits = {m: 0 for m in m_list}
    m_max = m_list[-1]
    for trial in range(trials):
        G = sample(trial_seed(seed, n, trial), n, m_max)
        for m in m_list:
            sr = section_radius(seqs[m], G.truncated(m), dense_cap=dense_cap, tol=tol)
            if sr.value >= threshold:
                hits[m] += 1
    report = DichotomyReport(alpha=alpha, beta=beta, n=n, eps=eps, trials=trials,
                             master_seed=seed)
    for m in m_list:
        report.rows.append({
            "m": m,
            "n_zero": seqs[m].n_zero(eps) if eps < 1 else seqs[m].n_zero(1 - 1e-12),
            "threshold": threshold,
            "frequency": hits[m] / trials,
        })
    return report


# ---------------------------------------------------------------------------
# Regime report: normalized ratio series and log-log slopes per decay regime.
# ---------------------------------------------------------------------------

def fit_loglog_slope(ns, means) -> tuple[float, float, float]:
    """(slope, intercept, rms residual) of log(mean) against log(n)."""
    x = np.log(np.asarray(ns, dtype=float))
    y = np.log(np.asarray(means, dtype=float))
    slope, intercept = np.polyfit(x, y, 1)
    resid = float(np.sqrt(np.mean((y - (slope * x + intercept))**2)))
    return float(slope), float(intercept), resid


def _normalizer(seq: SemiAxes, n: int) -> tuple[str, float]:
    if seq.family == "exponential":
        return "sigma_np1", seq.sigma_value(n + 1)
    if seq.family == "polynomial":
        if seq.alpha > 0.5:
            return "sigma_np1", seq.sigma_value(n + 1)
        if seq.alpha == 0.5 and seq.beta > 0.5:
            return "sigma_np1_sqrtlog", seq.sigma_value(n + 1) * math.sqrt(math.log(n + 1.0))
        return "sigma_1", seq.sigma_value(1)
    return "sigma_np1", seq.sigma_value(n + 1)


def regime_report(cases: dict) -> dict:
    """Normalized ratio series, spreads and log-log slopes for sweep summaries.

    ``cases`` maps a label to {"sequence": spec-dict, "cells": [summary dicts]}.
    For exponential sequences the estimator-error series is additionally fitted
    against n^2 a^n with a single constant K (its maximum over the grid).
    """
    report = {}
    for label, case in cases.items():
        seq_spec = case["sequence"]
        cells = sorted(case["cells"], key=lambda c: c["n"])
        ns = [c["n"] for c in cells]
        means = [c["mean_radius"] for c in cells]
        entry = {"sequence": seq_spec, "n": ns, "mean_radius": means}
        ratios = []
        norm_kind = None
        for c in cells:
            seq = SemiAxes.from_spec({**seq_spec, "m": c["m"]} if seq_spec["family"] != "explicit" else seq_spec)
            norm_kind, norm = _normalizer(seq, c["n"])
            ratios.append(c["mean_radius"] / norm if norm > 0 else math.inf)
        entry["normalizer"] = norm_kind
        entry["ratio"] = ratios
        finite = [r for r in ratios if math.isfinite(r) and r > 0]
        if finite:
            entry["ratio_spread"] = max(finite) / min(finite)
        if len(ns) >= 2 and all(v > 0 for v in means):
            slope, intercept, resid = fit_loglog_slope(ns, means)
            entry["loglog_slope"] = slope
            entry["loglog_intercept"] = intercept
            entry["loglog_residual"] = resid
        if seq_spec.get("family") == "exponential":
            a = seq_spec["a"]
            k_fits = []
            for c in cells:
                if not math.isnan(c.get("mean_error", math.nan)):
                    k_fits.append(c["mean_error"] / (c["n"]**2 * a**c["n"]))
            if k_fits:
                entry["error_n2an_K"] = max(k_fits)
        report[label] = entry
    return report
