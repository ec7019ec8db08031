"""Closed-form upper and lower bounds on section radii, as evaluable formulas.

Every bound returns a :class:`BoundReport` carrying the bound value, the
failure probability it claims, and the ratio of the sequence mass neglected by
the truncation to the tail mass the bound actually uses (so that truncation
error is visible, never silent).  Reports start without a left-hand side;
``evaluated(lhs)`` fills in an observed quantity and the holds flag.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import RankDeficiencyError
from .randmat import GaussianInfo, _row_generator
from .recovery import EstimatorSpec, worst_case_error
from .sequences import SemiAxes

__all__ = [
    "BoundReport",
    "ub_main",
    "ub_exponential",
    "lb_main",
    "realization_ub",
    "bvh_threshold",
    "gordon_an",
    "mstar_estimate",
    "mstar_capped_estimate",
    "rho_for_k",
    "mstar_section_bound",
    "elementary_lb",
]

_SQRT_2E = math.sqrt(2.0 * math.e)


@dataclass
class BoundReport:
    name: str
    kind: str                       # "upper" or "lower"
    rhs: float
    claimed_failure_prob: float
    lhs: float | None = None
    holds: bool | None = None
    params: dict = field(default_factory=dict)
    not_applicable: bool = False
    neglected_tail_ratio: float = 0.0

    @property
    def vacuous(self) -> bool:
        """True when the claimed failure probability carries no information."""
        return self.not_applicable or self.claimed_failure_prob >= 1.0

    def evaluated(self, lhs: float, tol: float = 0.0) -> "BoundReport":
        """A copy with the observed quantity filled in and ``holds`` decided.

        ``tol`` is an absolute allowance for bounds that hold surely but whose
        sides are computed with independent roundoff (exact ties would flip).
        """
        if self.kind == "upper":
            holds = lhs <= self.rhs + tol
        else:
            holds = lhs >= self.rhs - tol
        return replace(self, lhs=float(lhs), holds=bool(holds))

    def to_json(self) -> dict:
        return {
            "name": self.name, "kind": self.kind, "rhs": self.rhs,
            "claimed_failure_prob": self.claimed_failure_prob, "lhs": self.lhs,
            "holds": self.holds, "params": self.params,
            "not_applicable": self.not_applicable, "vacuous": self.vacuous,
            "neglected_tail_ratio": self.neglected_tail_ratio,
        }


def _tail_ratio(seq: SemiAxes, tail_used: float) -> float:
    neglected = seq.neglected_tail_sq()
    if neglected == 0.0:
        return 0.0
    if tail_used == 0.0:
        return math.inf
    return neglected / tail_used


def ub_main(seq: SemiAxes, n: int) -> BoundReport:
    """High-probability upper bound (221/sqrt(n)) * sqrt(sum_{j >= floor(n/4)} sigma_j^2).

    Claimed failure probability 2 exp(-n/100).  For n < 4 the floor is 0 and
    the sum runs over the whole sequence.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    start = max(n // 4, 1)
    tail = seq.tail_sq(start - 1)
    rhs = 221.0 / math.sqrt(n) * math.sqrt(tail)
    return BoundReport(
        name="ub_main", kind="upper", rhs=rhs,
        claimed_failure_prob=2.0 * math.exp(-n / 100.0),
        params={"n": n, "start_index": start},
        neglected_tail_ratio=_tail_ratio(seq, tail))


def ub_exponential(seq: SemiAxes, n: int, c: float = 1.0, s: float = 1.0) -> BoundReport:
    """Upper bound 14 s n * sqrt(sum_{j > n} sigma_j^2), suited to fast decay.

    Claimed failure probability exp(-c^2 n) + c sqrt(2e) / s, for c, s >= 1.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if c < 1 or s < 1:
        raise ValueError("need c >= 1 and s >= 1")
    tail = seq.tail_sq(n)
    rhs = 14.0 * s * n * math.sqrt(tail)
    return BoundReport(
        name="ub_exponential", kind="upper", rhs=rhs,
        claimed_failure_prob=math.exp(-c * c * n) + c * _SQRT_2E / s,
        params={"n": n, "c": c, "s": s},
        neglected_tail_ratio=_tail_ratio(seq, tail))


def lb_main(seq: SemiAxes, n: int, eps: float) -> BoundReport:
    """Lower bound sigma_k (1 - eps) for the smallest admissible k.

    Admissible means sum_{j > k} sigma_j^2 >= 3 n sigma_k^2 / eps^2 (and
    sigma_k > 0); the smallest such k maximizes sigma_k.  When no k qualifies
    the report carries rhs = 0 and the not-applicable flag.  Claimed failure
    probability 5 exp(-n/64).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if not (0 < eps < 1):
        raise ValueError("eps must lie in (0, 1)")
    sq = seq.values**2
    tails = seq._suffix_sq[1:seq.m + 1]
    ok = (sq > 0) & (eps * eps * tails >= 3.0 * n * sq)
    claimed = 5.0 * math.exp(-n / 64.0)
    hits = np.flatnonzero(ok)
    if hits.size == 0:
        return BoundReport(name="lb_main", kind="lower", rhs=0.0,
                           claimed_failure_prob=claimed,
                           params={"n": n, "eps": eps, "k": None},
                           not_applicable=True)
    k = int(hits[0]) + 1
    rhs = seq.sigma_value(k) * (1.0 - eps)
    return BoundReport(name="lb_main", kind="lower", rhs=rhs,
                       claimed_failure_prob=claimed,
                       params={"n": n, "eps": eps, "k": k},
                       neglected_tail_ratio=_tail_ratio(seq, seq.tail_sq(k)))


def realization_ub(seq: SemiAxes, G: GaussianInfo, k: int,
                   lhs: float | None = None) -> BoundReport:
    """Deterministic per-realization bound on the estimator's worst-case error.

    If G[:, :k] has full rank, then

        e  <=  sigma_{k+1} + s_1(Sigma_{cols > k}) / s_k(G[:, :k])

    holds surely, so the report claims failure probability 0 and ``holds``
    must come back true on every full-rank realization.  Pass ``lhs`` when the
    worst-case error for this realization is already known.
    """
    if not (1 <= k <= G.n):
        raise ValueError("need 1 <= k <= n")
    if G.m != seq.m:
        raise ValueError("realization and sequence disagree on the dimension m")
    sigma = seq.values
    psi = np.asarray(G.entries[:, :k], dtype=float)
    s_psi = np.linalg.svd(psi, compute_uv=False)
    rel = max(G.n, k) * np.finfo(float).eps
    if s_psi[-1] <= rel * s_psi[0]:
        raise RankDeficiencyError("G[:, :k] is numerically rank deficient")
    Sigma_tail = G.entries[:, k:] * sigma[np.newaxis, k:]
    if Sigma_tail.shape[1] == 0:
        s1_tail = 0.0
    else:
        lam = np.linalg.eigvalsh(Sigma_tail @ Sigma_tail.T)[-1]
        s1_tail = math.sqrt(max(lam, 0.0))
    rhs = seq.sigma_value(k + 1) + s1_tail / float(s_psi[-1])
    if lhs is None:
        lhs = worst_case_error(seq, G, EstimatorSpec(k))
    report = BoundReport(
        name="realization_ub", kind="upper", rhs=rhs, claimed_failure_prob=0.0,
        params={"n": G.n, "k": k, "s1_tail": s1_tail, "sk_psi": float(s_psi[-1])},
        neglected_tail_ratio=_tail_ratio(seq, seq.tail_sq(k)))
    # the inequality is sure, but both sides round independently; give exact
    # ties (e.g. a sequence supported on the first k coordinates) an allowance
    return report.evaluated(lhs, tol=1e-10 * seq.sigma_value(1))


def bvh_threshold(seq: SemiAxes, n: int, k: int, c: float = 1.0) -> float:
    """Spectral-norm threshold (3/2) sqrt(sum_{j>k} sigma_j^2) + 11 c sigma_{k+1} sqrt(n).

    The largest singular value of the structured tail matrix exceeds this with
    probability at most exp(-c^2 n).
    """
    if n < 1 or k < 0:
        raise ValueError("need n >= 1 and k >= 0")
    if c < 1:
        raise ValueError("need c >= 1")
    return 1.5 * math.sqrt(seq.tail_sq(k)) + 11.0 * c * seq.sigma_value(k + 1) * math.sqrt(n)


def gordon_an(n: int) -> float:
    """Expected Euclidean norm of an n-dimensional standard Gaussian vector.

    sqrt(2) Gamma((n+1)/2) / Gamma(n/2), evaluated through log-gamma; satisfies
    a_n < sqrt(n) and a_n = sqrt(n) (1 - 1/(4n) + O(n^-2)).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    return math.exp(0.5 * math.log(2.0) + math.lgamma((n + 1) / 2.0) - math.lgamma(n / 2.0))


def _sphere_directions(rng: np.random.Generator, samples: int, m: int) -> np.ndarray:
    u = rng.standard_normal((samples, m))
    u /= np.linalg.norm(u, axis=1, keepdims=True)
    return u


def mstar_estimate(seq: SemiAxes, samples: int, seed: int) -> tuple[float, float]:
    """Monte Carlo half mean width of the ellipsoid: mean of sqrt(sum sigma_j^2 u_j^2)
    over uniform sphere directions u, with its standard error."""
    if samples < 2:
        raise ValueError("need at least 2 samples")
    rng = _row_generator(seed, 0)
    sq = seq.values**2
    vals = np.empty(samples)
    done = 0
    chunk = max(1, min(samples, (1 << 22) // seq.m))
    while done < samples:
        take = min(chunk, samples - done)
        u = _sphere_directions(rng, take, seq.m)
        vals[done:done + take] = np.sqrt((u * u) @ sq)
        done += take
    est = float(np.mean(vals))
    se = float(np.std(vals, ddof=1) / math.sqrt(samples))
    return est, se


def rho_for_k(seq: SemiAxes, k: int) -> float:
    """Radius rho of the Euclidean cap with k rho^2 = sum_{j>k} sigma_j^2."""
    if not (1 <= k <= seq.m):
        raise ValueError("need 1 <= k <= m")
    return math.sqrt(seq.tail_sq(k) / k)


def mstar_capped_estimate(seq: SemiAxes, k: int, rho: float, samples: int,
                          seed: int) -> tuple[float, float]:
    """Monte Carlo overestimate of the half mean width of the capped body
    E_sigma intersected with rho B_2, through the support-function bound
    h^2 <= 2 rho^2 sum_{j<=k} u_j^2 + 2 sum_{j>k} sigma_j^2 u_j^2."""
    if samples < 2:
        raise ValueError("need at least 2 samples")
    rng = _row_generator(seed, 1)
    wsq = np.concatenate([np.full(k, 2.0 * rho * rho), 2.0 * seq.values[k:]**2])
    vals = np.empty(samples)
    done = 0
    chunk = max(1, min(samples, (1 << 22) // seq.m))
    while done < samples:
        take = min(chunk, samples - done)
        u = _sphere_directions(rng, take, seq.m)
        vals[done:done + take] = np.sqrt((u * u) @ wsq)
        done += take
    return float(np.mean(vals)), float(np.std(vals, ddof=1) / math.sqrt(samples))


def mstar_section_bound(seq: SemiAxes, n: int, gamma: float, k: int,
                        mstar_rho: float) -> BoundReport:
    """Mean-width route to an upper bound on the section radius.

    rhs = a_m * M*(K_rho) / (gamma a_n) with the Monte Carlo estimate
    ``mstar_rho`` of the capped body's half mean width; claimed failure
    probability (7/2) exp(-(1-gamma)^2 a_n^2 / 18).  The cap radius rho is
    undefined when the tail past k vanishes; then the report is flagged
    not applicable.
    """
    if not (0 < gamma < 1):
        raise ValueError("gamma must lie in (0, 1)")
    if not (1 <= n < seq.m):
        raise ValueError("need 1 <= n < m")
    if not (1 <= k <= seq.m):
        raise ValueError("need 1 <= k <= m")
    an = gordon_an(n)
    claimed = 3.5 * math.exp(-((1.0 - gamma)**2) * an * an / 18.0)
    if seq.tail_sq(k) == 0.0:
        return BoundReport(name="mstar_section", kind="upper", rhs=math.inf,
                           claimed_failure_prob=claimed,
                           params={"n": n, "k": k, "gamma": gamma, "rho": None},
                           not_applicable=True)
    rho = rho_for_k(seq, k)
    rhs = gordon_an(seq.m) * mstar_rho / (gamma * an)
    return BoundReport(name="mstar_section", kind="upper", rhs=rhs,
                       claimed_failure_prob=claimed,
                       params={"n": n, "k": k, "gamma": gamma, "rho": rho,
                               "mstar_rho": mstar_rho},
                       neglected_tail_ratio=_tail_ratio(seq, seq.tail_sq(k)))


def elementary_lb(m: int, n: int, eps: float, sigma_m: float, alpha: float) -> float:
    """Elementary lower bound sqrt(eps c^2 / (1 + eps c^2)) with c = sigma_m m^alpha.

    Valid with confidence 1 - eps for n < m^(1 - 2 alpha); the caller pairs the
    value with that confidence.
    """
    if not (0 < eps < 1):
        raise ValueError("eps must lie in (0, 1)")
    if not (0 < alpha < 0.5):
        raise ValueError("alpha must lie in (0, 1/2)")
    if not (1 <= n < m):
        raise ValueError("need 1 <= n < m")
    c_sq = (sigma_m * m**alpha) ** 2
    return math.sqrt(eps * c_sq / (1.0 + eps * c_sq))
