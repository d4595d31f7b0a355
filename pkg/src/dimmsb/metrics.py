"""Permutation-matched L1 errors and membership summary statistics."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import linear_sum_assignment

from .core import DimensionMismatch, MembershipMatrix

HIGHLY_MIXED = 0.5


def _weights(pi) -> np.ndarray:
    return pi.weights if isinstance(pi, MembershipMatrix) else np.asarray(pi, dtype=float)


def match_permutation(pi_hat, pi) -> tuple[np.ndarray, float]:
    """Column permutation of ``pi_hat`` minimizing the entrywise L1 distance to ``pi``.

    Returns ``(perm, cost)`` where ``pi_hat[:, perm]`` is the aligned
    estimate. The objective separates over columns, so this is a linear
    assignment on the ``K x K`` cost ``C[a, b] = sum_i |pi_hat[i, a] - pi[i, b]|``.
    """
    A, B = _weights(pi_hat), _weights(pi)
    if A.shape != B.shape:
        raise DimensionMismatch(f"shapes differ: {A.shape} vs {B.shape}")
    cost = np.abs(A[:, :, None] - B[:, None, :]).sum(axis=0)
    rows, cols = linear_sum_assignment(cost)
    perm = np.empty(A.shape[1], dtype=np.int64)
    perm[cols] = rows
    return perm, float(np.abs(A[:, perm] - B).sum())


def mixed_hamming(pi_hat, pi) -> float:
    _, cost = match_permutation(pi_hat, pi)
    return cost / _weights(pi).shape[0]


def di_mixed_hamming(pi_r_hat, pi_r, pi_c_hat, pi_c) -> float:
    """Row and column matched costs (each minimized on its own) over ``n_r + n_c``."""
    _, cr = match_permutation(pi_r_hat, pi_r)
    _, cc = match_permutation(pi_c_hat, pi_c)
    return (cr + cc) / (_weights(pi_r).shape[0] + _weights(pi_c).shape[0])


def diversity(pi_row) -> float:
    """Second-largest over largest entry; 0 for a pure node, 1 for a uniform one."""
    p = np.sort(np.asarray(pi_row, dtype=float))[::-1]
    if len(p) < 2:
        return 0.0
    return float(p[1] / p[0])


def _diversities(w: np.ndarray) -> np.ndarray:
    if w.shape[1] < 2:
        return np.zeros(w.shape[0])
    s = np.sort(w, axis=1)
    return s[:, -2] / s[:, -1]


@dataclass(frozen=True)
class NetworkStats:
    n_r: int
    n_c: int
    pure_r: int
    pure_c: int
    mixed_r: int
    mixed_c: int
    mhamm: Optional[float] = None

    @property
    def mu_r(self) -> float:
        return self.pure_r / self.n_r

    @property
    def mu_c(self) -> float:
        return self.pure_c / self.n_c

    @property
    def nu_r(self) -> float:
        return self.mixed_r / self.n_r

    @property
    def nu_c(self) -> float:
        return self.mixed_c / self.n_c


def network_stats(pi_r_hat, pi_c_hat, pure_tol: float = 1e-6, with_mhamm: bool = True) -> NetworkStats:
    """Pure and highly-mixed fractions for both sides.

    A row counts as pure when its largest weight is at least ``1 - pure_tol``
    and as highly mixed when its diversity is at least 0.5. ``mhamm``
    compares the two estimates and is only filled when row and column
    labels coincide (or, without labels, when ``n_r == n_c``).
    """
    wr, wc = _weights(pi_r_hat), _weights(pi_c_hat)
    mhamm = None
    if with_mhamm and wr.shape == wc.shape:
        lr = getattr(pi_r_hat, "labels", None)
        lc = getattr(pi_c_hat, "labels", None)
        if lr is None or lc is None:
            mhamm = mixed_hamming(wr, wc)
        elif set(lr) == set(lc):
            order = {lab: i for i, lab in enumerate(lc)}
            mhamm = mixed_hamming(wr, wc[[order[lab] for lab in lr]])
    return NetworkStats(
        n_r=wr.shape[0],
        n_c=wc.shape[0],
        pure_r=int(np.count_nonzero(wr.max(axis=1) >= 1.0 - pure_tol)),
        pure_c=int(np.count_nonzero(wc.max(axis=1) >= 1.0 - pure_tol)),
        mixed_r=int(np.count_nonzero(_diversities(wr) >= HIGHLY_MIXED)),
        mixed_c=int(np.count_nonzero(_diversities(wc) >= HIGHLY_MIXED)),
        mhamm=mhamm,
    )
