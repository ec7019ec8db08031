"""The acceptance suite: every exit criterion as an executable check.

Each criterion function returns a :class:`CriterionResult` with the observed
numbers in ``details``; tolerances are pinned here and nowhere else.  The
functions share an :class:`AcceptanceContext` so that the regime sweeps are
run once and re-used by the per-record chain checks.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
import scipy.linalg
from scipy.stats import chi2

from . import bounds as bnd
from . import concentration as conc
from .experiments import (SweepConfig, csv_bytes, dichotomy_experiment, run_sweep,
                          summary_json_bytes, trial_seed)
from .geometry import ball_coordinate_sq, coordinate_radius, section_radius
from .randmat import sample
from .sequences import SemiAxes

__all__ = ["CriterionResult", "AcceptanceContext", "CRITERIA", "run_criteria"]


@dataclass
class CriterionResult:
    cid: int
    name: str
    passed: bool
    details: str
    seconds: float

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status} criterion {self.cid} ({self.name}) [{self.seconds:.1f}s]: {self.details}"


class AcceptanceContext:
    """Shared sweeps and settings for the criteria."""

    def __init__(self, threads: int = 2, log=None):
        self.threads = threads
        self.log = log or (lambda msg: None)
        self._cache = {}

    def _sweep(self, key, config: SweepConfig):
        if key not in self._cache:
            self.log(f"running sweep {key} ...")
            self._cache[key] = run_sweep(config, threads=self.threads, log=self.log)
        return self._cache[key]

    # regime sweeps (criterion 5/6), shared with the chain criterion 3
    def sweep_alpha1(self):
        return self._sweep("alpha1", SweepConfig(
            sequence={"family": "polynomial", "alpha": 1.0, "beta": 0.0},
            n_list=[8, 16, 32, 64], m_rule={"kind": "multiple", "c": 64},
            trials=100, master_seed=1050, dense_cap=256))

    def sweep_quarter(self):
        return self._sweep("quarter", SweepConfig(
            sequence={"family": "polynomial", "alpha": 0.25, "beta": 0.0},
            n_list=[1, 5, 10], m_rule={"kind": "fixed", "m": 4096},
            trials=100, master_seed=1051, dense_cap=256))

    def sweep_critical(self):
        return self._sweep("critical", SweepConfig(
            sequence={"family": "polynomial", "alpha": 0.5, "beta": 1.0},
            n_list=[16, 32, 64], m_rule={"kind": "fixed", "m": 1 << 17},
            trials=100, master_seed=1052, dense_cap=256))

    def sweep_exponential(self):
        return self._sweep("exponential", SweepConfig(
            sequence={"family": "exponential", "a": 0.5},
            n_list=list(range(5, 26)), m_rule={"kind": "fixed", "m": 96},
            trials=200, master_seed=1053, dense_cap=256,
            estimator_k_rule={"kind": "full"}))

    def all_records(self):
        records = []
        for sweep in (self.sweep_alpha1, self.sweep_quarter, self.sweep_critical,
                      self.sweep_exponential):
            records.extend(sweep()[0])
        return records


def _map(ctx, fn, items):
    if ctx.threads > 1:
        with ThreadPoolExecutor(max_workers=ctx.threads) as pool:
            return list(pool.map(fn, items))
    return [fn(it) for it in items]


# --------------------------------------------------------------------------
# criterion 1: exact mean of the unit-ball coordinate radius
# --------------------------------------------------------------------------

def criterion_1(ctx: AcceptanceContext) -> CriterionResult:
    t0 = time.perf_counter()
    m, trials, seed = 200, 2000, 1001
    msgs, ok = [], True
    for n in (20, 100, 180):
        vals = np.array(_map(ctx, lambda t: ball_coordinate_sq(
            sample(trial_seed(seed, n, t), n, m)), range(trials)))
        mean = vals.mean()
        se = vals.std(ddof=1) / math.sqrt(trials)
        target = (m - n) / m
        ok &= abs(mean - target) <= 3 * se
        msgs.append(f"n={n}: mean {mean:.5f} vs (m-n)/m {target:.5f} (3se {3*se:.5f})")
    return CriterionResult(1, "ball coordinate mean (m-n)/m", ok,
                           "; ".join(msgs), time.perf_counter() - t0)


# --------------------------------------------------------------------------
# criterion 2: iterative radius and coordinate radius against independent oracles
# --------------------------------------------------------------------------

def radius_oracle(seq: SemiAxes, G) -> float:
    """Independent dense oracle: parametrize ker(G) by an orthonormal null-space
    basis N and solve the generalized eigenproblem max ||N z|| s.t. z' (N' D^-2 N) z <= 1."""
    N = scipy.linalg.null_space(np.asarray(G.entries, dtype=float))
    inv_sq = 1.0 / seq.values**2
    A = N.T @ N
    B = N.T @ (inv_sq[:, None] * N)
    lam = scipy.linalg.eigh(A, B, eigvals_only=True)
    return math.sqrt(max(float(lam[-1]), 0.0))


def coordinate_oracle(seq: SemiAxes, G, k: int) -> float:
    """Independent oracle via the Lagrangian closed form on the null-space
    parametrization: max of the linear functional x_k over the section
    equals sqrt(c' M^-1 c) with c = N' e_k, M = N' D^-2 N."""
    N = scipy.linalg.null_space(np.asarray(G.entries, dtype=float))
    inv_sq = 1.0 / seq.values**2
    M = N.T @ (inv_sq[:, None] * N)
    c = N[k - 1, :]
    return math.sqrt(max(float(c @ np.linalg.solve(M, c)), 0.0))


def criterion_2(ctx: AcceptanceContext) -> CriterionResult:
    t0 = time.perf_counter()
    rng = np.random.Generator(np.random.Philox(key=np.array([1002, 0], dtype=np.uint64)))
    worst_r, worst_c = 0.0, 0.0
    for i in range(50):
        m = int(rng.integers(8, 65))
        n = int(rng.integers(1, m))
        values = np.sort(rng.uniform(0.05, 1.0, size=m))[::-1]
        seq = SemiAxes.explicit(values)
        G = sample(trial_seed(1002, i, 0), n, m)
        it = section_radius(seq, G, dense_cap=0).value
        oracle = radius_oracle(seq, G)
        worst_r = max(worst_r, abs(it - oracle) / oracle)
        k = int(rng.integers(1, m + 1))
        cr = coordinate_radius(seq, G, k)
        co = coordinate_oracle(seq, G, k)
        worst_c = max(worst_c, abs(cr - co) / max(co, 1e-300))
    ok = worst_r <= 1e-8 and worst_c <= 1e-6
    return CriterionResult(2, "oracle equivalence", ok,
                           f"worst radius rel err {worst_r:.2e} (tol 1e-8), "
                           f"worst coordinate rel err {worst_c:.2e} (tol 1e-6)",
                           time.perf_counter() - t0)


# --------------------------------------------------------------------------
# criterion 3: per-realization ordering chain over every sweep record
# --------------------------------------------------------------------------

def criterion_3(ctx: AcceptanceContext) -> CriterionResult:
    t0 = time.perf_counter()
    records = [r for r in ctx.all_records() if not r.failed]
    chain_bad = sum(1 for r in records
                    if not (r.sigma_np1 <= r.radius <= r.error_an + 1e-8))
    realization_bad = sum(1 for r in records if r.realization_ub_holds == "false")
    checked = sum(1 for r in records if r.realization_ub_holds != "na")
    ok = chain_bad == 0 and realization_bad == 0 and checked > 0
    return CriterionResult(3, "per-realization chain", ok,
                           f"{len(records)} records, chain violations {chain_bad}, "
                           f"realization bound violations {realization_bad}/{checked}",
                           time.perf_counter() - t0)


# --------------------------------------------------------------------------
# criterion 4: the main high-probability upper bound is never exceeded
# --------------------------------------------------------------------------

def criterion_4(ctx: AcceptanceContext) -> CriterionResult:
    t0 = time.perf_counter()
    config = SweepConfig(
        sequence={"family": "polynomial", "alpha": 1.0, "beta": 0.0},
        n_list=[50, 100], m_rule={"kind": "multiple", "c": 64},
        trials=500, master_seed=1004, dense_cap=256,
        outputs={"error_an": False})
    records, _ = run_sweep(config, threads=ctx.threads, log=ctx.log)
    exceed = sum(1 for r in records if r.radius > r.ub_main)
    ok = exceed == 0
    return CriterionResult(4, "upper bound exceedance frequency", ok,
                           f"{exceed}/{len(records)} records above the bound "
                           f"(claimed <= 2exp(-n/100))",
                           time.perf_counter() - t0)


# --------------------------------------------------------------------------
# criterion 5: polynomial decay regimes at desk scale
# --------------------------------------------------------------------------

def criterion_5(ctx: AcceptanceContext) -> CriterionResult:
    t0 = time.perf_counter()
    msgs, ok = [], True

    _, summaries = ctx.sweep_alpha1()
    ratios = [s.ratio_opt for s in summaries]
    in_window = all(1.0 <= r <= 30.0 for r in ratios)
    spread = max(ratios) / min(ratios)
    ok &= in_window and spread <= 3.0
    msgs.append(f"(a) ratios {['%.2f' % r for r in ratios]} in [1,30]={in_window}, "
                f"spread {spread:.2f} (<=3)")

    records, summaries = ctx.sweep_quarter()
    seq = SemiAxes.polynomial(0.25, 0.0, m=4096)
    n0 = seq.n_zero(0.5)
    sigma_1 = seq.sigma_value(1)
    freqs = []
    for s in summaries:
        cell = [r.radius for r in records if r.n == s.n and not r.failed]
        freqs.append(sum(v >= 0.5 * sigma_1 for v in cell) / len(cell))
    ok &= max(s.n for s in summaries) == n0 and all(f >= 0.95 for f in freqs)
    msgs.append(f"(b) n_zero={n0}, freqs {freqs} (each >=0.95)")

    _, summaries = ctx.sweep_critical()
    rlog = [s.ratio_log for s in summaries]
    window = max(rlog) / min(rlog)
    ok &= window <= 4.0
    msgs.append(f"(c) log-normalized ratios {['%.2f' % r for r in rlog]}, "
                f"window {window:.2f} (<=4), tail_ratio {summaries[0].tail_ratio:.3f}")

    return CriterionResult(5, "polynomial regimes", ok, "; ".join(msgs),
                           time.perf_counter() - t0)


# --------------------------------------------------------------------------
# criterion 6: exponential decay, estimator error against n^2 a^n
# --------------------------------------------------------------------------

def criterion_6(ctx: AcceptanceContext) -> CriterionResult:
    t0 = time.perf_counter()
    _, summaries = ctx.sweep_exponential()
    a = 0.5
    lower_ok = all(s.mean_radius >= s.sigma_np1 for s in summaries)
    K = max(s.mean_error / (s.n**2 * a**s.n) for s in summaries)
    ok = lower_ok and K <= 50.0
    return CriterionResult(6, "exponential regime", ok,
                           f"sigma_(n+1) <= mean R_n for all n: {lower_ok}; "
                           f"fitted K {K:.2f} (<=50)",
                           time.perf_counter() - t0)


# --------------------------------------------------------------------------
# criterion 7: concentration suite, zero violated verdicts
# --------------------------------------------------------------------------

def criterion_7(ctx: AcceptanceContext) -> CriterionResult:
    t0 = time.perf_counter()
    trials, seed = 10_000, 1007
    checks = []

    lo, hi = conc.check_laurent_massart(np.ones(50), 0.3, trials, seed)
    checks.extend([lo, hi])
    exact_lo = float(chi2.cdf(0.7 * 50, df=50))
    exact_hi = float(chi2.sf(1.3 * 50, df=50))
    cdf_ok = (lo.lower_conf_95 <= exact_lo <= lo.upper_conf_95
              and hi.lower_conf_95 <= exact_hi <= hi.upper_conf_95)

    checks.append(conc.check_davidson_szarek(16, trials, seed + 1))
    checks.append(conc.check_szarek(20, 0.1, trials, seed + 2))
    checks.append(conc.check_bvh(SemiAxes.polynomial(1.0, 0.0, m=2048),
                                 32, 16, 1.0, trials, seed + 3))
    checks.append(conc.check_smin_basic(np.ones(400), 20, 0.5, trials, seed + 4))
    for _, chk in conc.check_gordon_comparison(np.ones(100), 10,
                                               [5.0, 6.0, 6.5, 7.0, 8.0], trials, seed + 5):
        checks.append(chk)

    violated = [c.name for c in checks if c.verdict == "violated"]
    ok = not violated and cdf_ok
    details = (f"{len(checks)} checks, violated: {violated or 'none'}; "
               f"chi-square cross-check inside band: {cdf_ok} "
               f"(exact {exact_lo:.4f}/{exact_hi:.4f} vs freq "
               f"{lo.empirical_freq:.4f}/{hi.empirical_freq:.4f})")
    return CriterionResult(7, "concentration suite", ok, details,
                           time.perf_counter() - t0)


# --------------------------------------------------------------------------
# criterion 8: the dichotomy at desk scale
# --------------------------------------------------------------------------

def criterion_8(ctx: AcceptanceContext) -> CriterionResult:
    t0 = time.perf_counter()
    flat = dichotomy_experiment(0.0, 0.0, 1, [10_000], 0.01, 200, 1008, dense_cap=32)
    freq_flat = flat.rows[0]["frequency"]

    sched = dichotomy_experiment(0.25, 0.0, 4, [2**p for p in range(8, 15)],
                                 0.5, 200, 1009, dense_cap=32)
    freqs = sched.frequencies()
    monotone = all(b >= a for a, b in zip(freqs, freqs[1:]))
    ok = freq_flat == 1.0 and monotone and freqs[-1] >= 0.95
    return CriterionResult(8, "dichotomy", ok,
                           f"all-ones freq {freq_flat} (==1); alpha=1/4 freqs {freqs} "
                           f"non-decreasing={monotone}, final >=0.95",
                           time.perf_counter() - t0)


# --------------------------------------------------------------------------
# criterion 9: byte-identical outputs across worker-thread counts
# --------------------------------------------------------------------------

def criterion_9(ctx: AcceptanceContext) -> CriterionResult:
    t0 = time.perf_counter()
    config = SweepConfig(
        sequence={"family": "polynomial", "alpha": 1.0, "beta": 0.0},
        n_list=[4, 8], m_rule={"kind": "multiple", "c": 64},
        trials=20, master_seed=1010, dense_cap=64)
    blobs = set()
    for threads in range(1, 9):
        records, summaries = run_sweep(config, threads=threads, log=lambda _: None)
        blobs.add(csv_bytes(records) + summary_json_bytes(summaries, config.sequence))
    ok = len(blobs) == 1
    return CriterionResult(9, "determinism across threads", ok,
                           f"{len(blobs)} distinct output byte-streams over threads 1..8 (want 1)",
                           time.perf_counter() - t0)


CRITERIA = {
    1: criterion_1,
    2: criterion_2,
    3: criterion_3,
    4: criterion_4,
    5: criterion_5,
    6: criterion_6,
    7: criterion_7,
    8: criterion_8,
    9: criterion_9,
}


def run_criteria(ids=None, threads: int = 2, log=None) -> list[CriterionResult]:
    """Run the selected criteria (all by default), sharing one context."""
    ctx = AcceptanceContext(threads=threads, log=log)
    results = []
    for cid in sorted(ids or CRITERIA):
        results.append(CRITERIA[cid](ctx))
        if log:
            log(results[-1].line())
    return results
