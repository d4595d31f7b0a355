"""Directed mixed-membership generative model.

Edges are Bernoulli with mean ``Omega = Pi_r @ P @ Pi_c.T``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import (
    AllNodesRemoved,
    BiAdjacency,
    CountMismatch,
    DimensionMismatch,
    MembershipMatrix,
    ProbabilityMatrix,
    ProbabilityOutOfRange,
    index_labels,
)


@dataclass(frozen=True)
class ModelParams:
    P: ProbabilityMatrix
    pi_r: MembershipMatrix
    pi_c: MembershipMatrix

    def __post_init__(self):
        K = self.P.K
        if self.pi_r.K != K or self.pi_c.K != K:
            raise DimensionMismatch(
                f"P is {K}x{K} but memberships have K={self.pi_r.K} (rows), {self.pi_c.K} (cols)"
            )

    @property
    def n_r(self) -> int:
        return self.pi_r.n

    @property
    def n_c(self) -> int:
        return self.pi_c.n

    @property
    def K(self) -> int:
        return self.P.K


@dataclass(frozen=True)
class MixedProfileSpec:
    """Planted mixed rows: each ``(pmf, count)`` pair adds ``count`` copies of ``pmf``."""

    profiles: tuple[tuple[tuple[float, ...], int], ...] = ()

    def __post_init__(self):
        cleaned = []
        for pmf, count in self.profiles:
            pmf = tuple(float(x) for x in pmf)
            if any(x < 0 for x in pmf) or abs(sum(pmf) - 1.0) > 1e-12:
                raise ValueError(f"profile {pmf} is not a PMF")
            if count < 0:
                raise CountMismatch(f"negative count {count}")
            cleaned.append((pmf, int(count)))
        object.__setattr__(self, "profiles", tuple(cleaned))

    @property
    def total(self) -> int:
        return sum(c for _, c in self.profiles)

    @classmethod
    def even(cls, pmfs: Sequence[Sequence[float]], n_mixed: int) -> "MixedProfileSpec":
        """Split ``n_mixed`` nodes evenly across ``pmfs``; requires exact divisibility."""
        if n_mixed < 0:
            raise CountMismatch(f"negative number of mixed nodes ({n_mixed})")
        if n_mixed == 0:
            return cls(())
        g = len(pmfs)
        if g == 0 or n_mixed % g:
            raise CountMismatch(f"{n_mixed} mixed nodes cannot be split evenly into {g} groups")
        return cls(tuple((tuple(p), n_mixed // g) for p in pmfs))


# Mixed PMFs of the K = 3 simulation studies.
DEFAULT_MIXED_PMFS = (
    (0.4, 0.4, 0.2),
    (0.4, 0.2, 0.4),
    (0.2, 0.4, 0.4),
    (1 / 3, 1 / 3, 1 / 3),
)


def build_omega(params: ModelParams) -> np.ndarray:
    """Population adjacency ``Pi_r P Pi_c'`` as a dense ``n_r x n_c`` array."""
    if params.pi_r.K != params.P.K or params.pi_c.K != params.P.K:
        raise DimensionMismatch("community counts disagree")
    omega = params.pi_r.weights @ params.P.entries @ params.pi_c.weights.T
    # Convex combinations of values in [0, 1] can drift by an ulp.
    return np.clip(omega, 0.0, 1.0)


def sample_adjacency(omega, seed, row_labels=None, col_labels=None) -> BiAdjacency:
    """Draw ``A(i, j) ~ Bernoulli(omega(i, j))`` independently.

    Uses a Philox stream; cell ``(i, j)`` consumes uniform draw number
    ``i * n_c + j``, so the result depends only on ``(omega, seed)``.
    ``seed`` may be an int or a :class:`numpy.random.SeedSequence`.
    """
    omega = np.asarray(omega, dtype=float)
    if omega.ndim != 2:
        raise DimensionMismatch("omega must be 2-D")
    if not np.all(np.isfinite(omega)) or omega.min(initial=0) < 0 or omega.max(initial=0) > 1:
        raise ProbabilityOutOfRange("omega entries must lie in [0, 1]")
    n_r, n_c = omega.shape
    rng = np.random.Generator(np.random.Philox(seed))
    u = rng.random(n_r * n_c).reshape(n_r, n_c)
    rows, cols = np.nonzero(u < omega)
    return BiAdjacency.from_edges(
        n_r, n_c, np.column_stack([rows, cols]), row_labels=row_labels, col_labels=col_labels
    )


def prune_zero_degree(a: BiAdjacency, pi_r: MembershipMatrix, pi_c: MembershipMatrix):
    """Drop zero out-degree rows and zero in-degree columns in a single pass.

    Returns the pruned adjacency and the matching truth rows. Not iterated:
    a column can lose all its edges here and still be kept.
    """
    if a.n_r != pi_r.n or a.n_c != pi_c.n:
        raise DimensionMismatch(
            f"adjacency {a.shape} vs memberships ({pi_r.n}, {pi_c.n})"
        )
    rows = np.flatnonzero(a.row_degrees() > 0)
    cols = np.flatnonzero(a.col_degrees() > 0)
    if len(rows) == 0 or len(cols) == 0:
        raise AllNodesRemoved("sample has no edges left after removing zero-degree nodes")
    pr = pi_r if pi_r.labels is not None else pi_r.with_labels(a.row_labels)
    pc = pi_c if pi_c.labels is not None else pi_c.with_labels(a.col_labels)
    return a.submatrix(rows, cols), pr.subset(rows), pc.subset(cols)


def make_planted_memberships(
    n: int, K: int, n_pure: int, profiles: MixedProfileSpec = MixedProfileSpec(), labels=None
) -> MembershipMatrix:
    """Pure nodes first (``n_pure`` per community, in community order), then profile rows."""
    if K * n_pure + profiles.total != n:
        raise CountMismatch(f"K*n_pure + mixed = {K * n_pure + profiles.total} != n = {n}")
    w = np.zeros((n, K))
    w[np.arange(K * n_pure), np.repeat(np.arange(K), n_pure)] = 1.0
    i = K * n_pure
    for pmf, count in profiles.profiles:
        if len(pmf) != K:
            raise DimensionMismatch(f"profile {pmf} has length {len(pmf)}, expected {K}")
        w[i : i + count] = pmf
        i += count
    return MembershipMatrix(w, index_labels(n) if labels is None else labels)


@dataclass(frozen=True)
class IdentifiabilityReport:
    sigma_ratio: float
    row_pure_counts: tuple[int, ...]
    col_pure_counts: tuple[int, ...]
    full_rank: bool
    pure_nodes: bool

    @property
    def ok(self) -> bool:
        return self.full_rank and self.pure_nodes

    def summary(self) -> str:
        return (
            f"I1 (rank P = K): {'pass' if self.full_rank else 'FAIL'} "
            f"[sigma_K/sigma_1 = {self.sigma_ratio:.3g}]; "
            f"I2 (pure node per community): {'pass' if self.pure_nodes else 'FAIL'} "
            f"[rows {list(self.row_pure_counts)}, cols {list(self.col_pure_counts)}]"
        )


def _pure_counts(pi: MembershipMatrix) -> tuple[int, ...]:
    return tuple(int(c) for c in (pi.weights == 1.0).sum(axis=0))


def check_identifiability(params: ModelParams) -> IdentifiabilityReport:
    s = params.P.singular_values()
    ratio = float(s[-1] / s[0]) if s[0] > 0 else 0.0
    rows = _pure_counts(params.pi_r)
    cols = _pure_counts(params.pi_c)
    return IdentifiabilityReport(
        sigma_ratio=ratio,
        row_pure_counts=rows,
        col_pure_counts=cols,
        full_rank=ratio > 1e-10,
        pure_nodes=min(rows) >= 1 and min(cols) >= 1,
    )
