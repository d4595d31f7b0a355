"""Domain types and error classes shared across the package.

All containers are frozen dataclasses holding read-only numpy arrays, so a
value can be handed to worker threads without copying.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np
import scipy.sparse as sp

ROW_SUM_TOL = 1e-12


class DimmsbError(Exception):
    """Base class for every error raised by this package."""


class MembershipError(DimmsbError, ValueError):
    def __init__(self, violations: Sequence[str]):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class NegativeEntry(MembershipError):
    pass


class RowSumMismatch(MembershipError):
    pass


class DimensionMismatch(DimmsbError, ValueError):
    pass


class ProbabilityOutOfRange(DimmsbError, ValueError):
    pass


class AllNodesRemoved(DimmsbError):
    pass


class CountMismatch(DimmsbError, ValueError):
    pass


class ConvergenceFailure(DimmsbError):
    pass


class RankDeficient(DimmsbError):
    pass


class RankCollapse(DimmsbError):
    pass


class ZeroDegreeNode(DimmsbError):
    pass


class SingularCornerMatrix(DimmsbError):
    pass


class ParseError(DimmsbError):
    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class NonBinaryWeight(ParseError):
    pass


class NotSquare(DimmsbError, ValueError):
    pass


class EmptyIntersection(DimmsbError):
    pass


class EmptyAfterFilter(DimmsbError):
    pass


class UnknownId(DimmsbError, KeyError):
    pass


class ConfigError(DimmsbError, ValueError):
    pass


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float, copy=True)
    a.setflags(write=False)
    return a


def _labels(labels: Optional[Iterable], n: int, what: str) -> Optional[tuple[str, ...]]:
    if labels is None:
        return None
    labels = tuple(str(x) for x in labels)
    if len(labels) != n:
        raise DimensionMismatch(f"{what}: expected {n} labels, got {len(labels)}")
    if len(set(labels)) != n:
        raise DimensionMismatch(f"{what}: labels are not unique")
    return labels


def index_labels(n: int) -> tuple[str, ...]:
    """1-based string labels, used whenever a graph is synthesized."""
    return tuple(str(i + 1) for i in range(n))


@dataclass(frozen=True, eq=False)
class MembershipMatrix:
    """Row-stochastic ``n x K`` matrix of community weights.

    Construct through :func:`validate_membership` (pure check) or
    :meth:`from_unnormalized` (renormalizes first).
    """

    weights: np.ndarray
    labels: Optional[tuple[str, ...]] = None

    def __post_init__(self):
        object.__setattr__(self, "weights", _readonly(self.weights))
        object.__setattr__(self, "labels", _labels(self.labels, self.weights.shape[0], "membership"))
        _check_membership(self.weights)

    @property
    def n(self) -> int:
        return self.weights.shape[0]

    @property
    def K(self) -> int:
        return self.weights.shape[1]

    def subset(self, rows) -> "MembershipMatrix":
        rows = np.asarray(rows)
        labels = None if self.labels is None else tuple(self.labels[i] for i in rows)
        return MembershipMatrix(self.weights[rows], labels)

    def with_labels(self, labels) -> "MembershipMatrix":
        return MembershipMatrix(self.weights, labels)

    @classmethod
    def from_unnormalized(cls, weights, labels=None) -> "MembershipMatrix":
        w = np.asarray(weights, dtype=float)
        if np.any(w < 0):
            raise NegativeEntry(["negative entry before normalization"])
        return cls(w / w.sum(axis=1, keepdims=True), labels)

    def pure_mask(self, tol: float = 0.0) -> np.ndarray:
        return self.weights.max(axis=1) >= 1.0 - tol

    def __eq__(self, other):
        if not isinstance(other, MembershipMatrix):
            return NotImplemented
        return (
            self.weights.shape == other.weights.shape
            and bool(np.array_equal(self.weights, other.weights))
            and self.labels == other.labels
        )

    __hash__ = None


def _check_membership(w: np.ndarray) -> None:
    if w.ndim != 2:
        raise DimensionMismatch(f"membership weights must be 2-D, got shape {w.shape}")
    n, K = w.shape
    if K < 1 or n < K:
        raise DimensionMismatch(f"membership needs K >= 1 and n >= K, got n={n}, K={K}")
    if not np.all(np.isfinite(w)):
        raise MembershipError(["non-finite entries"])
    violations = []
    neg = np.argwhere(w < 0)
    over = np.argwhere(w > 1)
    for i, k in neg[:20]:
        violations.append(f"negative entry {w[i, k]!r} at ({i}, {k})")
    for i, k in over[:20]:
        violations.append(f"entry {w[i, k]!r} above 1 at ({i}, {k})")
    sums = w.sum(axis=1)
    bad = np.flatnonzero(np.abs(sums - 1.0) > ROW_SUM_TOL)
    for i in bad[:20]:
        violations.append(f"row {i} sums to {sums[i]!r}")
    if len(neg) or len(over):
        raise NegativeEntry(violations)
    if len(bad):
        raise RowSumMismatch(violations)


def validate_membership(weights, labels=None) -> MembershipMatrix:
    """Check ``weights`` is row-stochastic and wrap it; never renormalizes."""
    w = np.asarray(weights, dtype=float)
    if not np.all(np.isfinite(w)):
        raise MembershipError(["non-finite entries"])
    return MembershipMatrix(w, labels)


@dataclass(frozen=True, eq=False)
class ProbabilityMatrix:
    """Block connectivity ``P = rho * p_tilde`` with ``max(p_tilde) == 1``."""

    entries: np.ndarray
    rho: float
    p_tilde: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "entries", _readonly(self.entries))
        object.__setattr__(self, "p_tilde", _readonly(self.p_tilde))
        object.__setattr__(self, "rho", float(self.rho))
        P, Pt = self.entries, self.p_tilde
        if P.ndim != 2 or P.shape[0] != P.shape[1] or Pt.shape != P.shape:
            raise DimensionMismatch(f"P must be square K x K, got {P.shape} / {Pt.shape}")
        if not 0 < self.rho <= 1:
            raise ProbabilityOutOfRange(f"rho must lie in (0, 1], got {self.rho}")
        if np.any(P < 0) or np.any(P > 1):
            raise ProbabilityOutOfRange("P entries must lie in [0, 1]")
        if abs(Pt.max() - 1.0) > 1e-12:
            raise ProbabilityOutOfRange(f"max entry of p_tilde must be 1, got {Pt.max()!r}")
        if np.max(np.abs(P - self.rho * Pt)) > 1e-12:
            raise ProbabilityOutOfRange("entries != rho * p_tilde")

    @classmethod
    def from_entries(cls, P) -> "ProbabilityMatrix":
        P = np.asarray(P, dtype=float)
        rho = float(P.max())
        if rho <= 0:
            raise ProbabilityOutOfRange("P has no positive entry")
        return cls(P, rho, P / rho)

    @classmethod
    def from_scaled(cls, rho: float, p_tilde) -> "ProbabilityMatrix":
        Pt = np.asarray(p_tilde, dtype=float)
        return cls(rho * Pt, rho, Pt)

    @property
    def K(self) -> int:
        return self.entries.shape[0]

    def singular_values(self) -> np.ndarray:
        return np.linalg.svd(self.entries, compute_uv=False)

    def is_full_rank(self) -> bool:
        s = self.singular_values()
        return bool(s[-1] > 1e-10 * s[0])


@dataclass(frozen=True, eq=False)
class BiAdjacency:
    """Binary ``n_r x n_c`` directed adjacency with persistent node labels."""

    matrix: sp.csr_matrix
    row_labels: tuple[str, ...]
    col_labels: tuple[str, ...]

    def __post_init__(self):
        m = sp.csr_matrix(self.matrix, dtype=np.int8)
        m.sum_duplicates()
        m.eliminate_zeros()
        if m.nnz and (m.data.max() != 1 or m.data.min() != 1):
            raise ParseError("adjacency must be binary without duplicate pairs")
        m.sort_indices()
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "row_labels", _labels(self.row_labels, m.shape[0], "rows"))
        object.__setattr__(self, "col_labels", _labels(self.col_labels, m.shape[1], "cols"))

    @classmethod
    def from_edges(cls, n_r: int, n_c: int, edges, row_labels=None, col_labels=None) -> "BiAdjacency":
        edges = np.asarray(list(edges), dtype=np.int64).reshape(-1, 2)
        if len(edges) and (
            edges.min() < 0 or edges[:, 0].max() >= n_r or edges[:, 1].max() >= n_c
        ):
            raise DimensionMismatch("edge index out of range")
        edges = np.unique(edges, axis=0)
        m = sp.csr_matrix(
            (np.ones(len(edges), dtype=np.int8), (edges[:, 0], edges[:, 1])), shape=(n_r, n_c)
        )
        return cls(
            m,
            index_labels(n_r) if row_labels is None else row_labels,
            index_labels(n_c) if col_labels is None else col_labels,
        )

    @classmethod
    def from_dense(cls, a, row_labels=None, col_labels=None) -> "BiAdjacency":
        a = np.asarray(a)
        if np.any((a != 0) & (a != 1)):
            raise NonBinaryWeight("dense adjacency has entries outside {0, 1}")
        return cls(
            sp.csr_matrix(a.astype(np.int8)),
            index_labels(a.shape[0]) if row_labels is None else row_labels,
            index_labels(a.shape[1]) if col_labels is None else col_labels,
        )

    @property
    def n_r(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_c(self) -> int:
        return self.matrix.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.matrix.shape

    @property
    def n_edges(self) -> int:
        return self.matrix.nnz

    def edges(self) -> np.ndarray:
        coo = self.matrix.tocoo()
        return np.column_stack([coo.row, coo.col]).astype(np.int64)

    def row_degrees(self) -> np.ndarray:
        return np.asarray(self.matrix.sum(axis=1)).ravel().astype(np.int64)

    def col_degrees(self) -> np.ndarray:
        return np.asarray(self.matrix.sum(axis=0)).ravel().astype(np.int64)

    def toarray(self) -> np.ndarray:
        return self.matrix.toarray().astype(float)

    def submatrix(self, rows, cols) -> "BiAdjacency":
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        return BiAdjacency(
            self.matrix[rows][:, cols],
            tuple(self.row_labels[i] for i in rows),
            tuple(self.col_labels[j] for j in cols),
        )

    def __eq__(self, other):
        if not isinstance(other, BiAdjacency):
            return NotImplemented
        return (
            self.shape == other.shape
            and self.row_labels == other.row_labels
            and self.col_labels == other.col_labels
            and (self.matrix != other.matrix).nnz == 0
        )

    __hash__ = None


@dataclass(frozen=True, eq=False)
class SvdFactor:
    """Top-K singular triplet ``U diag(s) V'``."""

    U: np.ndarray
    singular_values: np.ndarray
    V: np.ndarray

    def __post_init__(self):
        for name in ("U", "singular_values", "V"):
            object.__setattr__(self, name, _readonly(getattr(self, name)))
        K = len(self.singular_values)
        if self.U.shape[1] != K or self.V.shape[1] != K:
            raise DimensionMismatch("U, singular_values and V disagree on K")

    @property
    def K(self) -> int:
        return len(self.singular_values)

    def reconstruct(self) -> np.ndarray:
        return (self.U * self.singular_values) @ self.V.T


@dataclass(frozen=True, eq=False)
class VertexSet:
    """Row indices picked by successive projection and the matching rows."""

    indices: tuple[int, ...]
    corners: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "indices", tuple(int(i) for i in self.indices))
        object.__setattr__(self, "corners", _readonly(self.corners))
        if len(set(self.indices)) != len(self.indices):
            raise ValueError("vertex indices must be distinct")
        if self.corners.shape[0] != len(self.indices):
            raise DimensionMismatch("one corner row per index expected")

    @property
    def K(self) -> int:
        return len(self.indices)

