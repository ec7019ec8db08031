"""The least-squares estimator built on random information and its exact worst-case error.

The estimator reconstructs only the first k coordinates: with psi the
restriction of the realization G to those coordinates, it maps

    x  ->  psi^+ (G x),   embedded into the first k coordinates,

which reproduces every x supported there and equals
argmin_{y in R^k} ||G (x - y)||_2.  Its worst-case error over the ellipsoid
is an operator norm, not a sampled quantity: parametrizing x = D y with
||y||_2 <= 1 gives  e = s_1(iota psi^+ Sigma - D)  with Sigma = G diag(sigma).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import RankDeficiencyError
from .randmat import GaussianInfo, lanczos_top_eig
from .sequences import SemiAxes

__all__ = ["EstimatorSpec", "apply_estimator", "worst_case_error", "optimal_radius"]

_DENSE_ERROR_CAP = 64


@dataclass(frozen=True)
class EstimatorSpec:
    """Coordinate budget k of the estimator plus the rank cutoff for psi^+.

    ``rank_tol`` is relative to the largest singular value; None selects the
    standard max(n, k) * machine epsilon rule.
    """

    k: int
    rank_tol: float | None = None

    def __post_init__(self):
        if self.k < 0:
            raise ValueError("k must be >= 0")


def _pinv_factors(G: GaussianInfo, spec: EstimatorSpec):
    """SVD factors of psi = G[:, :k], with the full-rank check."""
    k = spec.k
    if k > G.n:
        raise ValueError("estimator needs k <= n")
    psi = np.asarray(G.entries[:, :k], dtype=float)
    U, s, Vt = np.linalg.svd(psi, full_matrices=False)
    rel = max(G.n, k) * np.finfo(float).eps if spec.rank_tol is None else spec.rank_tol
    if k > 0 and (s.size < k or s[-1] <= rel * s[0]):
        raise RankDeficiencyError(
            f"G[:, :{k}] is numerically rank deficient (smallest sv {s[-1]:.3e})")
    return U, s, Vt


def apply_estimator(G: GaussianInfo, spec: EstimatorSpec, x: np.ndarray) -> np.ndarray:
    """A(x) = psi^+ (G x), embedded into the first k coordinates of R^m."""
    x = np.asarray(x, dtype=float)
    if x.shape != (G.m,):
        raise ValueError("x must be a vector of length m")
    out = np.zeros(G.m)
    if spec.k == 0:
        return out
    U, s, Vt = _pinv_factors(G, spec)
    b = G.entries @ x
    out[:spec.k] = Vt.T @ ((U.T @ b) / s)
    return out


def worst_case_error(seq: SemiAxes, G: GaussianInfo, spec: EstimatorSpec, *,
                     tol: float = 1e-10, max_iter: int | None = None,
                     dense_cap: int = _DENSE_ERROR_CAP) -> float:
    """sup over the ellipsoid of ||A(x) - x||_2, exact up to solver tolerance.

    Computed as the largest singular value of the error operator restricted to
    the ellipsoid; never by sampling (sampling only gives lower bounds).
    """
    if G.m != seq.m:
        raise ValueError("realization and sequence disagree on the dimension m")
    sigma = seq.values
    m, k = G.m, spec.k
    if k == 0:
        # no information used: the best the zero map can do is the whole ellipsoid
        return float(sigma[0])
    U, s, Vt = _pinv_factors(G, spec)
    Sigma = G.entries * sigma[np.newaxis, :]
    B = Vt.T @ ((U.T @ Sigma) / s[:, np.newaxis])     # psi^+ Sigma, k x m
    B[np.arange(k), np.arange(k)] -= sigma[:k]
    if m <= dense_cap:
        M = np.zeros((m, m))
        M[:k] = B
        idx = np.arange(k, m)
        M[idx, idx] = -sigma[k:]
        return float(np.linalg.svd(M, compute_uv=False)[0])
    dd = np.zeros(m)
    dd[k:] = sigma[k:]**2

    def mv(v):
        return B.T @ (B @ v) + dd * v

    est = lanczos_top_eig(mv, m, tol=tol, max_iter=max_iter,
                          seed=G.master_seed ^ 0x5EED ^ (k << 40))
    return math.sqrt(max(est.value, 0.0))


def optimal_radius(seq: SemiAxes, n: int) -> float:
    """Radius of optimal information: sigma_{n+1} (zero once n >= m)."""
    if n < 0:
        raise ValueError("n must be >= 0")
    return seq.sigma_value(n + 1)
