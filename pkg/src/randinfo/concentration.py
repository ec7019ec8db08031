"""Empirical verification of the probabilistic tail inequalities.

Each check runs seeded Monte Carlo trials of the relevant statistic, counts
how often the claimed tail event occurs, and compares the frequency against
the claimed bound with a one-sided 95% Clopper-Pearson band.  A check is only
"violated" when the entire band sits above the claimed bound; claims too rare
to test at the given trial count come back "inconclusive".  The inequalities
are theorems, so a violated verdict indicates an implementation bug.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import beta as beta_dist

from .bounds import bvh_threshold
from .randmat import _row_generator
from .sequences import SemiAxes

__all__ = [
    "TailCheck",
    "check_laurent_massart",
    "check_davidson_szarek",
    "check_szarek",
    "check_bvh",
    "check_smin_basic",
    "check_gordon_comparison",
]

_SQRT_2E = math.sqrt(2.0 * math.e)


@dataclass
class TailCheck:
    name: str
    trials: int
    threshold: float
    claimed_bound: float
    empirical_freq: float
    upper_conf_95: float
    lower_conf_95: float
    verdict: str                    # "consistent" | "violated" | "inconclusive"
    vacuous: bool = False
    params: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "name": self.name, "trials": self.trials, "threshold": self.threshold,
            "claimed_bound": self.claimed_bound, "empirical_freq": self.empirical_freq,
            "upper_conf_95": self.upper_conf_95, "lower_conf_95": self.lower_conf_95,
            "verdict": self.verdict, "vacuous": self.vacuous, "params": self.params,
        }


def _conf_bounds(count: int, trials: int) -> tuple[float, float]:
    """One-sided 95% Clopper-Pearson bounds for an observed frequency."""
    lower = float(beta_dist.ppf(0.05, count, trials - count + 1)) if count > 0 else 0.0
    upper = float(beta_dist.ppf(0.95, count + 1, trials - count)) if count < trials else 1.0
    return lower, upper


def make_check(name: str, count: int, trials: int, threshold: float,
               claimed_bound: float, *, vacuous: bool = False,
               params: dict | None = None) -> TailCheck:
    """Assemble a TailCheck from an event count with the common verdict rule."""
    if trials < 1:
        raise ValueError("need at least one trial")
    lower, upper = _conf_bounds(count, trials)
    claimed = min(claimed_bound, 1.0)
    if vacuous or claimed_bound >= 1.0:
        verdict = "consistent"
        vacuous = True
    elif lower > claimed:
        verdict = "violated"
    elif claimed < 5.0 / trials:
        verdict = "inconclusive"
    else:
        verdict = "consistent"
    return TailCheck(name=name, trials=trials, threshold=threshold,
                     claimed_bound=claimed_bound, empirical_freq=count / trials,
                     upper_conf_95=upper, lower_conf_95=lower, verdict=verdict,
                     vacuous=vacuous, params=params or {})


def _chunks(trials: int, per_trial: int, limit: int = 1 << 23):
    step = max(1, limit // max(per_trial, 1))
    done = 0
    while done < trials:
        take = min(step, trials - done)
        yield take
        done += take


def check_laurent_massart(a, delta: float, trials: int, seed: int) -> tuple[TailCheck, TailCheck]:
    """Two-sided chi-square-type concentration for sum u_j^2, Var u_j = a_j.

    Lower tail  P[sum <= (1-delta) sum a]  <= exp(-delta^2 |a|_1 / (4 |a|_inf)),
    upper tail  P[sum >= (1+delta) sum a]  <= exp(-delta^2 |a|_1 / (16 |a|_inf)).
    """
    a = np.asarray(a, dtype=float)
    if np.any(a <= 0):
        raise ValueError("weights must be positive")
    if not (0 < delta <= 1):
        raise ValueError("delta must lie in (0, 1]")
    if trials < 1000:
        raise ValueError("need at least 1000 trials")
    ratio = float(np.sum(a) / np.max(a))
    total = float(np.sum(a))
    sd = np.sqrt(a)
    rng = _row_generator(seed, 0)
    lo_count = hi_count = 0
    lo_thr, hi_thr = (1.0 - delta) * total, (1.0 + delta) * total
    for take in _chunks(trials, len(a)):
        z = rng.standard_normal((take, len(a))) * sd
        t = np.einsum("ij,ij->i", z, z)
        lo_count += int(np.count_nonzero(t <= lo_thr))
        hi_count += int(np.count_nonzero(t >= hi_thr))
    lo_claim = math.exp(-delta * delta * ratio / 4.0)
    hi_claim = math.exp(-delta * delta * ratio / 16.0)
    params = {"delta": delta, "l1_over_linf": ratio}
    return (make_check("laurent_massart_lower", lo_count, trials, lo_thr, lo_claim, params=params),
            make_check("laurent_massart_upper", hi_count, trials, hi_thr, hi_claim, params=params))


def check_davidson_szarek(n: int, trials: int, seed: int, *, k: int | None = None,
                          t: float | None = None) -> TailCheck:
    """Small-ball bound for the smallest singular value of the n x k Gaussian block.

    Default instantiation k = floor(n/2):  P[s_k <= sqrt(n)/7] <= exp(-n/100).
    The general form P[s_k <= sqrt(n)(1 - sqrt(k/n) - t)] <= exp(-n t^2 / 2)
    is exposed through (k, t); a non-positive threshold or a claimed bound of
    one is flagged vacuous.
    """
    if n < 2:
        raise ValueError("need n >= 2")
    if (k is None) != (t is None):
        raise ValueError("provide both k and t, or neither")
    if k is None:
        k = n // 2
        threshold = math.sqrt(n) / 7.0
        claimed = math.exp(-n / 100.0)
    else:
        if not (1 <= k <= n) or t < 0:
            raise ValueError("need 1 <= k <= n and t >= 0")
        threshold = math.sqrt(n) * (1.0 - math.sqrt(k / n) - t)
        claimed = math.exp(-n * t * t / 2.0)
    rng = _row_generator(seed, 0)
    count = 0
    for take in _chunks(trials, n * k, 1 << 22):
        z = rng.standard_normal((take, n, k))
        smin = np.linalg.svd(z, compute_uv=False)[:, -1]
        count += int(np.count_nonzero(smin <= threshold))
    vacuous = threshold <= 0 or claimed >= 1.0
    return make_check("davidson_szarek", count, trials, threshold, claimed,
                      vacuous=vacuous, params={"n": n, "k": k, "t": t})


def check_szarek(n: int, t: float, trials: int, seed: int) -> TailCheck:
    """Small-ball bound for the square case: P[s_n(G) <= t/sqrt(n)] <= t sqrt(2e).

    The bound is known to capture the right order, so for small t the observed
    frequency is also expected to stay within a constant factor below it; the
    lower confidence bound in the report carries that descriptive side.
    """
    if n < 1 or t < 0:
        raise ValueError("need n >= 1 and t >= 0")
    threshold = t / math.sqrt(n)
    claimed = t * _SQRT_2E
    rng = _row_generator(seed, 0)
    count = 0
    for take in _chunks(trials, n * n, 1 << 22):
        z = rng.standard_normal((take, n, n))
        smin = np.linalg.svd(z, compute_uv=False)[:, -1]
        count += int(np.count_nonzero(smin <= threshold))
    return make_check("szarek", count, trials, threshold, claimed,
                      vacuous=claimed >= 1.0, params={"n": n, "t": t})


def check_bvh(seq: SemiAxes, n: int, k: int, c: float, trials: int, seed: int) -> TailCheck:
    """Spectral-norm tail of the structured Gaussian matrix with columns past k.

    Counts how often s_1(Sigma_{[n], j>k}) exceeds the analytic threshold;
    claimed bound exp(-c^2 n).
    """
    if trials < 1000:
        raise ValueError("need at least 1000 trials")
    threshold = bvh_threshold(seq, n, k, c)
    claimed = math.exp(-c * c * n)
    w = seq.values[k:]
    cols = len(w)
    rng = _row_generator(seed, 0)
    count = 0
    if cols == 0 or np.all(w == 0.0):
        return make_check("bandeira_van_handel", 0, trials, threshold, claimed,
                          params={"n": n, "k": k, "c": c})
    for take in _chunks(trials, n * cols, 1 << 22):
        z = rng.standard_normal((take, n, cols)) * w[np.newaxis, np.newaxis, :]
        lam = np.linalg.eigvalsh(z @ np.swapaxes(z, 1, 2))[:, -1]
        s1 = np.sqrt(np.clip(lam, 0.0, None))
        count += int(np.count_nonzero(s1 >= threshold))
    return make_check("bandeira_van_handel", count, trials, threshold, claimed,
                      vacuous=claimed >= 1.0, params={"n": n, "k": k, "c": c})


def check_smin_basic(a, n: int, delta: float, trials: int, seed: int) -> TailCheck:
    """Gordon-route lower bound for s_n of a matrix with row variances a_i.

    P[s_n(A) <= sqrt((1-delta)|a|_1) - sqrt((1+delta) n |a|_inf)]
      <= 4 exp(-(delta^2/16) min(n, |a|_1/|a|_inf)).
    A non-positive threshold is flagged vacuous.
    """
    a = np.asarray(a, dtype=float)
    if np.any(a <= 0):
        raise ValueError("row variances must be positive")
    if not (0 < delta < 1):
        raise ValueError("delta must lie in (0, 1)")
    m = len(a)
    l1, linf = float(np.sum(a)), float(np.max(a))
    threshold = math.sqrt((1.0 - delta) * l1) - math.sqrt((1.0 + delta) * n * linf)
    claimed = 4.0 * math.exp(-(delta * delta / 16.0) * min(n, l1 / linf))
    sd = np.sqrt(a)
    rng = _row_generator(seed, 0)
    count = 0
    if threshold > 0 and n <= m:
        for take in _chunks(trials, m * n, 1 << 22):
            z = rng.standard_normal((take, m, n)) * sd[np.newaxis, :, np.newaxis]
            smin = np.linalg.svd(z, compute_uv=False)[:, -1]
            count += int(np.count_nonzero(smin <= threshold))
    vacuous = threshold <= 0 or claimed >= 1.0
    return make_check("smin_basic", count, trials, threshold, claimed,
                      vacuous=vacuous,
                      params={"n": n, "m": m, "delta": delta, "l1_over_linf": l1 / linf})


def check_gordon_comparison(a, n: int, c_grid, trials: int, seed: int) -> list[tuple[float, TailCheck]]:
    """Gaussian comparison at the instantiation used for the smin bound.

    For each level c the inequality  P[s_n(A) < c] <= 2 P[|D u|_2 - sqrt(|a|_inf) |v|_2 <= c]
    is tested with two independent Monte Carlo samples; the check is violated
    only when the 95% lower band of the left side exceeds twice the 95% upper
    band of the right side.
    """
    a = np.asarray(a, dtype=float)
    if np.any(a <= 0):
        raise ValueError("row variances must be positive")
    if trials < 1000:
        raise ValueError("need at least 1000 trials")
    m = len(a)
    sd = np.sqrt(a)
    linf = float(np.max(a))

    rng_lhs = _row_generator(seed, 0)
    smin = np.empty(trials)
    done = 0
    for take in _chunks(trials, m * n, 1 << 22):
        z = rng_lhs.standard_normal((take, m, n)) * sd[np.newaxis, :, np.newaxis]
        smin[done:done + take] = np.linalg.svd(z, compute_uv=False)[:, -1]
        done += take

    rng_rhs = _row_generator(seed, 1)
    comp = np.empty(trials)
    done = 0
    for take in _chunks(trials, m + n):
        u = rng_rhs.standard_normal((take, m))
        v = rng_rhs.standard_normal((take, n))
        comp[done:done + take] = (np.linalg.norm(u * sd, axis=1)
                                  - math.sqrt(linf) * np.linalg.norm(v, axis=1))
        done += take

    out = []
    for c in c_grid:
        lhs_count = int(np.count_nonzero(smin < c))
        rhs_count = int(np.count_nonzero(comp <= c))
        _, rhs_upper = _conf_bounds(rhs_count, trials)
        claimed = min(1.0, 2.0 * rhs_upper)
        check = make_check("gordon_comparison", lhs_count, trials, float(c), claimed,
                           params={"n": n, "m": m, "c": float(c),
                                   "rhs_freq": rhs_count / trials,
                                   "rhs_upper_conf_95": rhs_upper})
        out.append((float(c), check))
    return out
