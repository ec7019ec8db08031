"""Exact radii of random sections of an ellipsoid.

For a realization G of the information matrix, the section radius

    R = sup { ||x||_2 : x in E_sigma, G x = 0 }

is computed through the substitution y = D^{-1} x (D = diag(sigma) on the
support of sigma), which turns the ellipsoid into the unit ball and the
constraint into ker(Sigma) with Sigma = G diag(sigma).  R is then the largest
singular value of D restricted to ker(Sigma), i.e. sqrt(lambda_max(P D^2 P))
for the kernel projector P.  Coordinates with sigma_j = 0 are deleted first:
no point of the ellipsoid has mass there.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .randmat import GaussianInfo, KernelProjector, lanczos_top_eig
from .sequences import SemiAxes

__all__ = ["SectionRadius", "section_radius", "coordinate_radius", "ball_coordinate_sq"]

DENSE_CROSSOVER = 2048


@dataclass
class SectionRadius:
    """A computed section radius with solver diagnostics."""

    value: float
    n: int
    m: int
    method: str          # "dense" | "iterative"
    iterations: int
    residual: float
    converged: bool = True
    degenerate: bool = False

    def to_json(self) -> dict:
        return {
            "radius": self.value, "n": self.n, "m": self.m, "method": self.method,
            "iterations": self.iterations, "residual": self.residual,
            "converged": self.converged, "degenerate": self.degenerate,
        }


def _support_matrix(seq: SemiAxes, G: GaussianInfo):
    sigma = seq.values
    support = np.flatnonzero(sigma > 0)
    return sigma, support, G.entries[:, support] * sigma[support]


def section_radius(seq: SemiAxes, G: GaussianInfo, *, dense_cap: int = DENSE_CROSSOVER,
                   tol: float = 1e-10, max_iter: int | None = None) -> SectionRadius:
    """Radius of the ellipsoid section cut out by ker(G), for this realization.

    Dense eigen-decomposition below ``dense_cap`` support dimensions, Lanczos
    above.  The value always lies in [sigma_{n+1}, sigma_1] up to solver
    tolerance.
    """
    if G.m != seq.m:
        raise ValueError("realization and sequence disagree on the dimension m")
    sigma, support, Sigma = _support_matrix(seq, G)
    ms = len(support)
    if G.n == 0:
        return SectionRadius(float(sigma[0]), 0, G.m, "dense", 0, 0.0)
    if G.n >= ms:
        return SectionRadius(0.0, G.n, G.m, "dense", 0, 0.0, degenerate=True)
    w = sigma[support]
    if ms <= dense_cap:
        proj = KernelProjector(Sigma)
        P = proj.apply_columns(np.eye(ms))
        PD = P * w[np.newaxis, :]
        lam = np.linalg.eigvalsh(PD @ PD.T)[-1]
        return SectionRadius(math.sqrt(max(lam, 0.0)), G.n, G.m, "dense", 0, 0.0)
    proj = KernelProjector(Sigma)
    wsq = w**2

    def mv(v):
        return proj.apply(wsq * proj.apply(v))

    est = lanczos_top_eig(mv, ms, tol=tol, max_iter=max_iter,
                          seed=G.master_seed ^ (G.n << 32))
    value = math.sqrt(max(est.value, 0.0))
    return SectionRadius(value, G.n, G.m, "iterative", est.iterations,
                         est.residual, est.converged)


def coordinate_radius(seq: SemiAxes, G: GaussianInfo, k: int) -> float:
    """sup { |x_k| : x in E_sigma, G x = 0 } for this realization.

    Closed form sigma_k * ||P e_k||_2 with P the projector onto ker(Sigma);
    no iteration is involved.
    """
    if G.m != seq.m:
        raise ValueError("realization and sequence disagree on the dimension m")
    if not (1 <= k <= seq.m):
        raise ValueError("coordinate index out of range")
    sk = seq.sigma_value(k)
    if sk == 0.0:
        return 0.0
    if G.n == 0:
        return sk
    sigma, support, Sigma = _support_matrix(seq, G)
    ms = len(support)
    if G.n >= ms:
        return 0.0
    pos = int(np.searchsorted(support, k - 1))
    e = np.zeros(ms)
    e[pos] = 1.0
    proj = KernelProjector(Sigma)
    return sk * float(np.linalg.norm(proj.apply(e)))


def ball_coordinate_sq(G: GaussianInfo) -> float:
    """Squared first-coordinate radius of the unit ball cut by ker(G).

    This is ||P e_1||_2^2 for the projector P onto ker(G); its expectation
    over realizations is (m - n) / m.
    """
    if G.n >= G.m:
        raise ValueError("need n < m")
    if G.n == 0:
        return 1.0
    e = np.zeros(G.m)
    e[0] = 1.0
    proj = KernelProjector(np.asarray(G.entries, dtype=float))
    p = proj.apply(e)
    return float(p @ p)
