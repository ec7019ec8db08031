"""Reproducible Gaussian matrices and the spectral primitives built on them.

Sampling is counter-based: entry (i, j) of a realization is a deterministic
function of (master_seed, i, j) alone.  Each row is drawn from its own Philox
stream keyed by (master_seed, row), so

* the first n' rows of ``sample(seed, n, m)`` equal ``sample(seed, n', m)``
  (kernels are nested in n), and
* extending m appends entries without changing existing ones.

The spectral side provides dense singular values, an orthogonal projector
onto the kernel of a (structured) matrix, and a Lanczos iteration with full
reorthogonalization for extreme eigenvalues of large operators.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.linalg
from scipy.linalg import eigh_tridiagonal

from .errors import ConvergenceError, ResourceLimitError

__all__ = [
    "GaussianInfo",
    "StructuredMatrix",
    "KernelProjector",
    "EigEstimate",
    "sample",
    "singular_values",
    "kernel_projector_apply",
    "top_sv_of_projected_diag",
    "lanczos_top_eig",
]

_MASK64 = (1 << 64) - 1

#: Refuse to materialize realizations with more entries than this (~0.5 GiB).
DEFAULT_ENTRY_CAP = 1 << 26

#: Largest min-dimension for which dense SVD is allowed.
DEFAULT_DENSE_CAP = 2048

#: Below this operator dimension the both-ends Lanczos may grow its basis to
#: the full dimension, which makes the extreme eigenvalues exact.
_FULL_BASIS_CAP = 4096


def _row_generator(seed: int, row: int) -> np.random.Generator:
    key = np.array([seed & _MASK64, row & _MASK64], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


@dataclass(frozen=True)
class GaussianInfo:
    """A realization of an n x m standard Gaussian information matrix."""

    master_seed: int
    n: int
    m: int
    entries: np.ndarray

    def row(self, i: int) -> np.ndarray:
        return self.entries[i]

    def truncated(self, m: int) -> "GaussianInfo":
        """The same realization restricted to its first ``m`` columns.

        Identical to ``sample(master_seed, n, m)`` by the nesting invariant,
        but without regeneration.
        """
        if not (1 <= m <= self.m):
            raise ValueError("truncation must satisfy 1 <= m <= self.m")
        return GaussianInfo(self.master_seed, self.n, m, self.entries[:, :m])


def sample(seed: int, n: int, m: int, *, entry_cap: int = DEFAULT_ENTRY_CAP) -> GaussianInfo:
    """Draw the deterministic realization for ``seed`` with n rows, m columns."""
    if n < 0 or m < 1:
        raise ValueError("need n >= 0 and m >= 1")
    if n * m > entry_cap:
        raise ResourceLimitError(
            f"requested {n}x{m} Gaussian matrix exceeds the entry cap {entry_cap}")
    entries = np.empty((n, m))
    for i in range(n):
        entries[i] = _row_generator(seed, i).standard_normal(m)
    entries.setflags(write=False)
    return GaussianInfo(seed, n, m, entries)


@dataclass(frozen=True)
class StructuredMatrix:
    """A contiguous block of a realization with per-column weights.

    Entry (i, j) is ``column_weights[j] * g_{ij}``; unit weights give the plain
    Gaussian block.
    """

    base: GaussianInfo
    row_range: tuple[int, int]
    col_range: tuple[int, int]
    column_weights: np.ndarray | None = None

    def __post_init__(self):
        i0, i1 = self.row_range
        j0, j1 = self.col_range
        if not (0 <= i0 <= i1 <= self.base.n and 0 <= j0 <= j1 <= self.base.m):
            raise ValueError("row/column ranges exceed the realization")
        if self.column_weights is not None and len(self.column_weights) != j1 - j0:
            raise ValueError("column_weights length must match the column range")

    @classmethod
    def whole(cls, base: GaussianInfo, column_weights=None) -> "StructuredMatrix":
        w = None if column_weights is None else np.asarray(column_weights, dtype=float)
        return cls(base, (0, base.n), (0, base.m), w)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.row_range[1] - self.row_range[0],
                self.col_range[1] - self.col_range[0])

    @cached_property
    def dense(self) -> np.ndarray:
        i0, i1 = self.row_range
        j0, j1 = self.col_range
        block = self.base.entries[i0:i1, j0:j1]
        if self.column_weights is not None:
            block = block * self.column_weights[np.newaxis, :]
        return np.ascontiguousarray(block)


def _as_dense(A) -> np.ndarray:
    if isinstance(A, StructuredMatrix):
        return A.dense
    if isinstance(A, GaussianInfo):
        return np.asarray(A.entries, dtype=float)
    return np.asarray(A, dtype=float)


# ---------------------------------------------------------------------------
# Lanczos iteration for extreme eigenvalues of symmetric PSD operators.
# ---------------------------------------------------------------------------

@dataclass
class EigEstimate:
    value: float
    iterations: int
    residual: float
    converged: bool


class _LanczosRun:
    """One Lanczos sweep with full reorthogonalization inside the basis block."""

    def __init__(self, matvec, dim, start, cap):
        self.matvec = matvec
        self.dim = dim
        self.cap = cap
        self.Q = np.empty((cap, dim))
        self.Q[0] = start
        self.alphas = np.empty(cap)
        self.betas = np.empty(cap)
        self.k = 0
        self.breakdown = False
        self._scale = 0.0

    def step(self) -> None:
        k = self.k
        u = self.matvec(self.Q[k])
        alpha = float(self.Q[k] @ u)
        u -= alpha * self.Q[k]
        if k > 0:
            u -= self.betas[k - 1] * self.Q[k - 1]
        u -= self.Q[:k + 1].T @ (self.Q[:k + 1] @ u)
        beta = float(np.linalg.norm(u))
        self.alphas[k] = alpha
        self.betas[k] = beta
        self._scale = max(self._scale, abs(alpha), beta)
        self.k = k + 1
        if beta <= 1e-14 * max(self._scale, 1e-300):
            self.breakdown = True
        elif self.k < self.cap:
            self.Q[self.k] = u / beta

    def ritz(self):
        """Eigenvalues/vectors of the current tridiagonal block."""
        k = self.k
        return eigh_tridiagonal(self.alphas[:k], self.betas[:k - 1])

    def ritz_vector(self, coeffs) -> np.ndarray:
        return coeffs @ self.Q[:self.k]


def lanczos_top_eig(matvec, dim: int, *, tol: float = 1e-10, max_iter: int | None = None,
                    seed: int = 0, basis_cap: int = 128, min_iter: int = 16) -> EigEstimate:
    """Largest eigenvalue of a symmetric positive semi-definite operator.

    Restarts from the best Ritz vector when the basis is full.  Convergence is
    declared when the Ritz residual drops below ``tol * value``; a value that
    has stagnated at machine precision for many steps is also accepted, with
    the honest residual reported.  Exhausting the Krylov space (breakdown) is
    exact and always accepted.
    """
    if dim < 1:
        raise ValueError("operator dimension must be >= 1")
    if max_iter is None:
        max_iter = 10 * dim
    rng = _row_generator(seed, 0xA5A5)
    if dim == 1:
        val = float(matvec(np.ones(1))[0])
        return EigEstimate(val, 1, 0.0, True)
    q = rng.standard_normal(dim)
    q /= np.linalg.norm(q)

    cap = max(2, min(basis_cap, dim))
    total = 0
    theta = math.inf
    residual = math.inf
    stagnant = 0

    while total < max_iter:
        run = _LanczosRun(matvec, dim, q, cap)
        while run.k < cap and total < max_iter:
            run.step()
            total += 1
            w, v = run.ritz()
            idx = int(np.argmax(w))
            new_theta = float(w[idx])
            residual = 0.0 if run.breakdown else float(abs(run.betas[run.k - 1] * v[-1, idx]))
            if abs(new_theta - theta) <= 5e-15 * max(abs(new_theta), 1e-300):
                stagnant += 1
            else:
                stagnant = 0
            theta = new_theta
            floor = max(abs(theta), 1e-300)
            if run.breakdown or (total >= min_iter and residual <= tol * floor):
                return EigEstimate(theta, total, residual, True)
            if stagnant >= 12:
                return EigEstimate(theta, total, residual, True)
        w, v = run.ritz()
        idx = int(np.argmax(w))
        q = run.ritz_vector(v[:, idx])
        nq = float(np.linalg.norm(q))
        if nq == 0.0:
            q = rng.standard_normal(dim)
            nq = float(np.linalg.norm(q))
        q /= nq

    raise ConvergenceError(
        f"Lanczos did not converge in {total} iterations (residual {residual:.3e})",
        estimate=theta, iterations=total, residual=residual)


def _lanczos_extreme_pair(matvec, dim: int, *, tol: float, max_iter: int | None,
                          seed: int) -> tuple[EigEstimate, EigEstimate]:
    """Both extreme eigenvalues from a single basis that may grow to ``dim``.

    With full reorthogonalization a basis of size ``dim`` (or a breakdown)
    reproduces the exact spectrum, so small operators are resolved to machine
    precision even when the bottom eigenvalue is orders of magnitude below the
    top one.
    """
    rng = _row_generator(seed, 0xA5A5)
    if dim == 1:
        val = float(matvec(np.ones(1))[0])
        return EigEstimate(val, 1, 0.0, True), EigEstimate(val, 1, 0.0, True)
    if max_iter is None:
        max_iter = 10 * dim
    q = rng.standard_normal(dim)
    q /= np.linalg.norm(q)
    run = _LanczosRun(matvec, dim, q, dim)
    total = 0
    while run.k < dim and total < max_iter:
        run.step()
        total += 1
        if run.breakdown:
            break
        if run.k < 2:
            continue
        w, v = run.ritz()
        hi, lo = int(np.argmax(w)), int(np.argmin(w))
        beta = run.betas[run.k - 1]
        res_hi = float(abs(beta * v[-1, hi]))
        res_lo = float(abs(beta * v[-1, lo]))
        scale = max(abs(float(w[hi])), 1e-300)
        # the bottom end must be resolved relative to itself, down to the
        # machine floor of the operator scale
        lo_floor = max(abs(float(w[lo])), 1e-14 * scale)
        if res_hi <= tol * scale and res_lo <= tol * lo_floor:
            return (EigEstimate(float(w[hi]), total, res_hi, True),
                    EigEstimate(float(w[lo]), total, res_lo, True))
    w, v = run.ritz()
    hi, lo = int(np.argmax(w)), int(np.argmin(w))
    if run.breakdown or run.k == dim:
        return (EigEstimate(float(w[hi]), total, 0.0, True),
                EigEstimate(float(w[lo]), total, 0.0, True))
    beta = run.betas[run.k - 1]
    raise ConvergenceError(
        f"Lanczos (both ends) did not converge in {total} iterations",
        estimate=float(w[hi]), iterations=total,
        residual=float(abs(beta * v[-1, hi])))


def _extreme_eigs(dense: np.ndarray, tol: float, max_iter: int | None, seed: int):
    """(lambda_max, lambda_min) of the Gram operator of the smaller side."""
    A = dense if dense.shape[0] <= dense.shape[1] else dense.T
    dim = A.shape[0]

    def gram_mv(v):
        return A @ (A.T @ v)

    if dim <= _FULL_BASIS_CAP:
        return _lanczos_extreme_pair(gram_mv, dim, tol=tol, max_iter=max_iter, seed=seed)

    # Large operators: restarted top-end runs; the bottom end goes through a
    # spectral shift, whose accuracy for a tiny lambda_min is limited by
    # cancellation at the machine floor of lambda_max.
    top = lanczos_top_eig(gram_mv, dim, tol=tol, max_iter=max_iter, seed=seed)
    mu = top.value * (1.0 + 1e-3) + 1e-300

    def shifted_mv(v):
        return mu * v - A @ (A.T @ v)

    bottom = lanczos_top_eig(shifted_mv, dim, tol=tol, max_iter=max_iter, seed=seed + 1)
    return top, EigEstimate(mu - bottom.value, bottom.iterations,
                            bottom.residual, bottom.converged)


def singular_values(A, mode: str = "all_dense", tol: float = 1e-10, *,
                    dense_cap: int = DEFAULT_DENSE_CAP, max_iter: int | None = None,
                    seed: int = 0) -> np.ndarray:
    """Singular values of a (structured) matrix, non-increasing.

    ``all_dense`` returns the full spectrum via LAPACK and requires the smaller
    dimension to be at most ``dense_cap``.  ``extreme_iterative`` returns only
    ``[s_1, s_min]`` via Lanczos on the Gram operator of the smaller side.
    """
    dense = _as_dense(A)
    if mode == "all_dense":
        if min(dense.shape) > dense_cap:
            raise ResourceLimitError(
                f"dense SVD refused: min(shape)={min(dense.shape)} exceeds cap {dense_cap}")
        return np.linalg.svd(dense, compute_uv=False)
    if mode == "extreme_iterative":
        top, bottom = _extreme_eigs(dense, tol, max_iter, seed)
        s1 = math.sqrt(max(top.value, 0.0))
        smin = math.sqrt(max(bottom.value, 0.0))
        return np.array([s1, smin])
    raise ValueError(f"unknown mode {mode!r}")


# ---------------------------------------------------------------------------
# Orthogonal projector onto ker(S).
# ---------------------------------------------------------------------------

class KernelProjector:
    """Orthogonal projector P onto ker(S), factored once for repeated applies.

    The factorization is a column-pivoted QR of S' (rank-revealing): with Q_r
    the leading orthonormal columns above the rank cutoff, P v = v - Q_r (Q_r' v).
    Cost O(n^2 m) once, O(n m) per apply, so m up to ~1e5 stays feasible.
    Going through an orthonormal row-space basis keeps the kernel tilt at
    eps * cond(S); a Gram-matrix route would square the condition number and
    break down for strongly weighted matrices (exponentially decaying sigma).
    """

    def __init__(self, S, rank_tol: float | None = None):
        S = np.ascontiguousarray(_as_dense(S), dtype=float)
        if S.ndim != 2:
            raise ValueError("S must be a matrix")
        n, m = S.shape
        if n > m:
            raise ValueError("KernelProjector expects a flat matrix (rows <= columns)")
        self.shape = (n, m)
        if n == 0:
            self.rank = 0
            self.deficient = False
            self._V = np.empty((m, 0))
            return
        Q, R, _ = scipy.linalg.qr(S.T, mode="economic", pivoting=True)
        diag = np.abs(np.diag(R))
        top = float(diag[0]) if diag.size else 0.0
        rel = max(n, m) * np.finfo(float).eps if rank_tol is None else rank_tol
        keep = diag > rel * top if top > 0 else np.zeros_like(diag, dtype=bool)
        self.rank = int(np.count_nonzero(keep))
        self.deficient = self.rank < n
        self._V = np.ascontiguousarray(Q[:, :self.rank])

    def apply(self, v: np.ndarray) -> np.ndarray:
        """P v = v - V_r (V_r' v)."""
        if self.rank == 0:
            return np.array(v, dtype=float, copy=True)
        return v - self._V @ (self._V.T @ v)

    def apply_columns(self, M: np.ndarray) -> np.ndarray:
        """P applied to every column of M."""
        if self.rank == 0:
            return np.array(M, dtype=float, copy=True)
        return M - self._V @ (self._V.T @ M)


def kernel_projector_apply(S, v: np.ndarray, tol: float | None = None) -> np.ndarray:
    """One-shot P v for the orthogonal projector P onto ker(S).

    ``tol`` is the relative rank cutoff of the factorization; build a
    :class:`KernelProjector` directly when several applies share one S.
    """
    return KernelProjector(S, rank_tol=tol).apply(np.asarray(v, dtype=float))


def top_sv_of_projected_diag(S, weights: np.ndarray, tol: float = 1e-10,
                             max_iter: int | None = None, *, seed: int = 0,
                             rank_tol: float | None = None) -> EigEstimate:
    """Largest singular value of diag(weights) restricted to ker(S).

    Equals sqrt(lambda_max(P D^2 P)) with P the kernel projector of S and
    D = diag(weights); computed by Lanczos on v -> P D^2 P v with matvec cost
    O(n m).  The returned estimate carries iteration count and residual.
    """
    weights = np.asarray(weights, dtype=float)
    dense = _as_dense(S)
    n, m = dense.shape
    if len(weights) != m:
        raise ValueError("weights length must match the number of columns")
    if n == 0:
        return EigEstimate(float(np.max(np.abs(weights))), 0, 0.0, True)
    if n >= m:
        raise ValueError("constraint matrix must have fewer rows than columns")
    proj = KernelProjector(dense, rank_tol=rank_tol)
    wsq = weights**2

    def mv(v):
        return proj.apply(wsq * proj.apply(v))

    est = lanczos_top_eig(mv, m, tol=tol, max_iter=max_iter, seed=seed)
    value = math.sqrt(max(est.value, 0.0))
    return EigEstimate(value, est.iterations, est.residual, est.converged)
