"""Successive projection (SP) corner finding.

Repeatedly take the residual row of largest Euclidean norm and project
every row onto the orthogonal complement of it.
"""
from __future__ import annotations

import numpy as np

from .core import RankCollapse, VertexSet

# Squared norms within this relative band of the max count as tied;
# the smallest index wins.
TIE_TOL = 1e-10
ZERO_TOL = 1e-12


def _pick(norm2: np.ndarray, init_norm2: float, step: int) -> int:
    m = norm2.max()
    if m <= (ZERO_TOL**2) * init_norm2 or m <= 0:
        raise RankCollapse(f"residual vanished after {step} picks; K exceeds the numerical rank")
    return int(np.flatnonzero(norm2 >= m * (1.0 - TIE_TOL))[0])


def successive_projection(y, K: int) -> VertexSet:
    """Select ``K`` rows of ``y`` (n x m) spanning an approximately maximal simplex.

    ``corners`` holds the original, unprojected rows at the selected indices.
    """
    y = np.asarray(y, dtype=float)
    n = y.shape[0]
    if not 1 <= K <= n:
        raise ValueError(f"K={K} must lie in [1, n={n}]")
    R = y.copy()
    norm2 = np.einsum("ij,ij->i", R, R)
    init = norm2.max()
    picks: list[int] = []
    for step in range(K):
        k = _pick(norm2, init, step)
        picks.append(k)
        u = R[k].copy()
        R -= np.outer(R @ u, u) / (u @ u)
        norm2 = np.einsum("ij,ij->i", R, R)
    return VertexSet(tuple(picks), y[picks])


def successive_projection_factored(x, basis, K: int) -> tuple[int, ...]:
    """SP on the rows of ``x @ basis.T`` without forming that matrix.

    Residual rows stay in the row space of ``basis.T``, so they are carried
    as coefficient rows of ``x`` under the Gram metric ``basis.T @ basis``.
    Returns the selected indices only (the corner rows are ``n`` wide).
    """
    X = np.array(x, dtype=float)
    B = np.asarray(basis, dtype=float)
    n = X.shape[0]
    if not 1 <= K <= n:
        raise ValueError(f"K={K} must lie in [1, n={n}]")
    G = B.T @ B
    norm2 = np.maximum(np.einsum("ij,jk,ik->i", X, G, X), 0.0)
    init = norm2.max()
    picks: list[int] = []
    for step in range(K):
        k = _pick(norm2, init, step)
        picks.append(k)
        xk = X[k].copy()
        gk = G @ xk
        X -= np.outer(X @ gk, xk) / (xk @ gk)
        norm2 = np.maximum(np.einsum("ij,jk,ik->i", X, G, X), 0.0)
    return tuple(picks)
