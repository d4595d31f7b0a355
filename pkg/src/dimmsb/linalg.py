"""Truncated SVD and spectral norm for dense or sparse rectangular matrices."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .core import BiAdjacency, ConvergenceFailure, RankDeficient, SvdFactor

RANK_TOL = 1e-12


@dataclass(frozen=True)
class SvdOptions:
    """Knobs for :func:`top_k_svd`.

    Matrices whose smaller side is at most ``max_dense_dim`` go through a
    dense LAPACK SVD; larger ones through seeded randomized subspace
    iteration, which runs at least ``power_iterations`` rounds and then
    continues until every residual ``||A v_k - s_k u_k||`` is below
    ``tolerance * s_1``.
    """

    oversampling: int = 10
    power_iterations: int = 5
    tolerance: float = 1e-10
    max_dense_dim: int = 512
    max_iterations: int = 2000
    seed: int = 0

    def __post_init__(self):
        if self.oversampling < 0:
            raise ValueError("oversampling must be >= 0")
        if self.power_iterations < 0:
            raise ValueError("power_iterations must be >= 0")
        if not self.tolerance > 0:
            raise ValueError("tolerance must be > 0")


def as_operator(a):
    """Dense ndarray or CSR matrix of floats for any supported input."""
    if isinstance(a, BiAdjacency):
        return a.matrix.astype(float)
    if sp.issparse(a):
        return sp.csr_matrix(a, dtype=float)
    return np.asarray(a, dtype=float)


def _orth(x: np.ndarray) -> np.ndarray:
    q, _ = np.linalg.qr(x)
    return q


def _fix_signs(U: np.ndarray, V: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # First non-negligible entry of each U column is made positive.
    U, V = U.copy(), V.copy()
    for k in range(U.shape[1]):
        col = np.abs(U[:, k])
        big = np.flatnonzero(col > RANK_TOL * col.max()) if col.max() > 0 else []
        if len(big) and U[big[0], k] < 0:
            U[:, k] *= -1
            V[:, k] *= -1
    return U, V


def top_k_svd(a, K: int, opts: SvdOptions | None = None) -> SvdFactor:
    """Leading ``K`` singular triplets of ``a`` (BiAdjacency, sparse or dense)."""
    opts = opts or SvdOptions()
    A = as_operator(a)
    n_r, n_c = A.shape
    if not 1 <= K <= min(n_r, n_c):
        raise ValueError(f"K={K} must lie in [1, min(n_r, n_c)={min(n_r, n_c)}]")

    if min(n_r, n_c) <= opts.max_dense_dim:
        dense = A.toarray() if sp.issparse(A) else A
        U, s, Vt = np.linalg.svd(dense, full_matrices=False)
        U, s, V = U[:, :K], s[:K], Vt[:K].T
    else:
        U, s, V = _subspace_iteration(A, K, opts)

    if s[0] <= 0 or s[K - 1] < RANK_TOL * s[0]:
        raise RankDeficient(
            f"sigma_{K} = {s[K - 1]:.3g} vs sigma_1 = {s[0]:.3g}; K exceeds the numerical rank"
        )
    U, V = _fix_signs(U, V)
    return SvdFactor(U, s, V)


def _subspace_iteration(A, K: int, opts: SvdOptions):
    n_r, n_c = A.shape
    ell = min(K + opts.oversampling, n_r, n_c)
    rng = np.random.Generator(np.random.Philox(opts.seed))
    Q = _orth(A @ rng.standard_normal((n_c, ell)))
    for it in range(opts.max_iterations):
        W = np.asarray(A.T @ Q)  # = (Q' A)'
        Ub, s, Vbt = np.linalg.svd(W.T, full_matrices=False)
        U = Q @ Ub[:, :K]
        V = Vbt[:K].T
        s = s[:K]
        if it >= opts.power_iterations:
            if s[0] == 0:
                return U, s, V
            resid = np.linalg.norm(np.asarray(A @ V) - U * s, axis=0)
            if resid.max() <= opts.tolerance * s[0]:
                return U, s, V
        Q = _orth(np.asarray(A @ _orth(W)))
    raise ConvergenceFailure(
        f"subspace iteration did not reach tolerance {opts.tolerance:g} "
        f"in {opts.max_iterations} iterations"
    )


def spectral_norm(a, block: int = 8, tol: float = 1e-12, max_iterations: int = 5000) -> float:
    """Largest singular value via block power iteration on ``A'A``.

    The start block is drawn from a fixed Philox stream, so repeated calls
    return identical values.
    """
    A = as_operator(a)
    n_r, n_c = A.shape
    if min(n_r, n_c) == 0:
        return 0.0
    if (sp.issparse(A) and A.nnz == 0) or (not sp.issparse(A) and not np.any(A)):
        return 0.0
    b = min(block, n_r, n_c)
    rng = np.random.Generator(np.random.Philox(0))
    X = _orth(rng.standard_normal((n_c, b)))
    prev = 0.0
    for _ in range(max_iterations):
        Y = np.asarray(A @ X)
        est = float(np.linalg.svd(Y, compute_uv=False)[0])
        if abs(est - prev) <= tol * est:
            return est
        prev = est
        X = _orth(np.asarray(A.T @ Y))
    return prev
