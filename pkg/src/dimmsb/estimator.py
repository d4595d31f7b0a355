"""Spectral membership estimation: PCA, vertex hunting, membership reconstruction."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import (
    BiAdjacency,
    MembershipMatrix,
    SingularCornerMatrix,
    SvdFactor,
    VertexSet,
    ZeroDegreeNode,
)
from .linalg import SvdOptions, top_k_svd
from .vertexhunt import successive_projection, successive_projection_factored

COND_LIMIT = 1e12


@dataclass(frozen=True)
class DispOptions:
    svd: SvdOptions = field(default_factory=SvdOptions)
    # The equivalence variant forms U U' explicitly only up to this many rows.
    materialize_limit: int = 2000
    cond_limit: float = COND_LIMIT


@dataclass(frozen=True)
class DispResult:
    pi_r_hat: MembershipMatrix
    pi_c_hat: MembershipMatrix
    vertex_r: VertexSet
    vertex_c: VertexSet
    svd: SvdFactor
    diagnostics: dict


def _normalize_rows(Y: np.ndarray) -> tuple[np.ndarray, int, int]:
    """Clip at zero and scale rows to sum 1.

    Rows with no positive entry fall back to the unit vector at the argmax
    of the unclipped row. Returns (weights, fallback_count, clipped_entries).
    """
    clipped = int(np.count_nonzero(Y < 0))
    Z = np.maximum(Y, 0.0)
    sums = Z.sum(axis=1)
    dead = sums <= 0
    out = np.zeros_like(Z)
    out[~dead] = Z[~dead] / sums[~dead, None]
    if dead.any():
        idx = np.flatnonzero(dead)
        out[idx, np.argmax(Y[idx], axis=1)] = 1.0
    return out, int(dead.sum()), clipped


def _solve_corners(gram: np.ndarray, rhs: np.ndarray, cond_limit: float) -> np.ndarray:
    """Return ``rhs' gram^{-1}`` for the symmetric corner Gram matrix."""
    cond = np.linalg.cond(gram)
    if not np.isfinite(cond) or cond > cond_limit:
        raise SingularCornerMatrix(f"corner Gram matrix condition number {cond:.3g} exceeds {cond_limit:g}")
    return np.linalg.solve(gram, rhs).T


def reconstruct_memberships(u, corners, labels=None, cond_limit: float = COND_LIMIT):
    """Memberships from ``Y = u C' (C C')^{-1}`` with clipping and L1 row scaling.

    Returns ``(MembershipMatrix, fallback_count)``.
    """
    u = np.asarray(u, dtype=float)
    C = np.asarray(corners, dtype=float)
    Y = _solve_corners(C @ C.T, C @ u.T, cond_limit)
    w, fallback, _ = _normalize_rows(Y)
    return MembershipMatrix(w, labels), fallback


def _side(u: np.ndarray, K: int, labels, cond_limit: float):
    vs = successive_projection(u, K)
    C = vs.corners
    Y = _solve_corners(C @ C.T, C @ u.T, cond_limit)
    w, fallback, clipped = _normalize_rows(Y)
    diag = {
        "corner_sigma_min": float(np.linalg.svd(C, compute_uv=False)[-1]),
        "corner_gram_cond": float(np.linalg.cond(C @ C.T)),
        "fallback_rows": fallback,
        "clipped_entries": clipped,
    }
    return MembershipMatrix(w, labels), vs, diag


def estimate_from_singular_vectors(U, V, K: int, row_labels=None, col_labels=None, cond_limit=COND_LIMIT):
    """Vertex hunting and membership reconstruction on given singular vectors.

    Returns ``(pi_r_hat, pi_c_hat, vertex_r, vertex_c, diagnostics)``.
    """
    pr, vr, dr = _side(np.asarray(U, dtype=float), K, row_labels, cond_limit)
    pc, vc, dc = _side(np.asarray(V, dtype=float), K, col_labels, cond_limit)
    diag = {f"row_{k}": v for k, v in dr.items()}
    diag.update({f"col_{k}": v for k, v in dc.items()})
    return pr, pc, vr, vc, diag


def _check_degrees(a: BiAdjacency) -> None:
    zr = np.flatnonzero(a.row_degrees() == 0)
    zc = np.flatnonzero(a.col_degrees() == 0)
    if a.n_r == 0 or a.n_c == 0:
        raise ZeroDegreeNode("empty adjacency")
    if len(zr) or len(zc):
        show_r = [a.row_labels[i] for i in zr[:5]]
        show_c = [a.col_labels[j] for j in zc[:5]]
        raise ZeroDegreeNode(
            f"{len(zr)} row node(s) with zero out-degree {show_r} and "
            f"{len(zc)} column node(s) with zero in-degree {show_c}; "
            "remove them first (degree filter with threshold 1)"
        )


def disp(a: BiAdjacency, K: int, opts: DispOptions | None = None) -> DispResult:
    """Estimate row and column memberships of a directed network with ``K`` communities."""
    opts = opts or DispOptions()
    _check_degrees(a)
    svd = top_k_svd(a, K, opts.svd)
    pr, pc, vr, vc, diag = estimate_from_singular_vectors(
        svd.U, svd.V, K, a.row_labels, a.col_labels, opts.cond_limit
    )
    diag["singular_values"] = [float(s) for s in svd.singular_values]
    return DispResult(pr, pc, vr, vc, svd, diag)


def ideal_disp(omega, K: int, opts: DispOptions | None = None):
    """Noiseless version: run the pipeline on the population matrix itself."""
    opts = opts or DispOptions()
    svd = top_k_svd(np.asarray(omega, dtype=float), K, opts.svd)
    pr, pc, _, _, _ = estimate_from_singular_vectors(svd.U, svd.V, K, cond_limit=opts.cond_limit)
    return pr, pc


def _side_projector(U: np.ndarray, K: int, labels, limit: int, cond_limit: float):
    n = U.shape[0]
    if n <= limit:
        U2 = U @ U.T
        vs = successive_projection(U2, K)
        C = vs.corners
        Y = _solve_corners(C @ C.T, C @ U2.T, cond_limit)
    else:
        idx = successive_projection_factored(U, U, K)
        G = U.T @ U
        UI = U[list(idx)]
        # U2 C' = U G U_I'  and  C C' = U_I G U_I'
        Y = _solve_corners(UI @ G @ UI.T, UI @ G @ U.T, cond_limit)
        vs = VertexSet(idx, UI @ U.T)
    w, fallback, clipped = _normalize_rows(Y)
    diag = {"fallback_rows": fallback, "clipped_entries": clipped, "materialized": n <= limit}
    return MembershipMatrix(w, labels), vs, diag


def disp_equivalence(a: BiAdjacency, K: int, opts: DispOptions | None = None) -> DispResult:
    """Same estimator run on the projection matrices ``U U'`` and ``V V'``."""
    opts = opts or DispOptions()
    _check_degrees(a)
    svd = top_k_svd(a, K, opts.svd)
    pr, vr, dr = _side_projector(svd.U, K, a.row_labels, opts.materialize_limit, opts.cond_limit)
    pc, vc, dc = _side_projector(svd.V, K, a.col_labels, opts.materialize_limit, opts.cond_limit)
    diag = {f"row_{k}": v for k, v in dr.items()}
    diag.update({f"col_{k}": v for k, v in dc.items()})
    diag["singular_values"] = [float(s) for s in svd.singular_values]
    return DispResult(pr, pc, vr, vc, svd, diag)
