"""Reading and writing graphs/memberships, plus real-network preprocessing.

Edge-list format: one ``src<TAB>dst`` pair per line (any whitespace is
accepted), optional third column with a 0/1 weight, ``#`` starts a
comment. Two optional directive comments pin the node universes and their
order, which lets isolated nodes survive a round trip::

    #@rows a b c
    #@cols b c d

Matrix Market files use the coordinate format (``pattern``, ``integer`` or
``real`` field with 0/1 values) and the same directives prefixed by ``%@``.
"""
from __future__ import annotations

import csv
import hashlib
import json
import warnings
from pathlib import Path
from typing import Iterable, Optional

import numpy as np
from scipy.sparse.csgraph import connected_components

from .core import (
    BiAdjacency,
    EmptyIntersection,
    MembershipMatrix,
    NonBinaryWeight,
    NotSquare,
    ParseError,
    index_labels,
)

FORMATS = ("tsv", "mtx")


def provenance(seed=None, config=None) -> list[str]:
    """Metadata lines written at the top of every output file."""
    from . import __version__

    parts = [f"dimmsb {__version__}"]
    if seed is not None:
        parts.append(f"seed={seed}")
    if config is not None:
        blob = json.dumps(config, sort_keys=True, default=str).encode()
        parts.append(f"config_sha256={hashlib.sha256(blob).hexdigest()[:16]}")
    return [" ".join(parts)]


def guess_format(path) -> str:
    return "mtx" if str(path).endswith(".mtx") else "tsv"


def _binary(token: str, lineno: int, strict: bool) -> int:
    try:
        w = float(token)
    except ValueError:
        raise ParseError(f"weight {token!r} is not a number", lineno) from None
    if w in (0.0, 1.0):
        return int(w)
    if strict:
        raise NonBinaryWeight(f"weight {token!r} is not 0 or 1", lineno)
    return int(w != 0)


class _Universe:
    def __init__(self, fixed: Optional[list[str]] = None):
        self.index: dict[str, int] = {}
        self.fixed = fixed is not None
        for lab in fixed or ():
            self.index.setdefault(lab, len(self.index))

    def get(self, label: str, lineno: int) -> int:
        i = self.index.get(label)
        if i is None:
            if self.fixed:
                raise ParseError(f"label {label!r} not declared in header", lineno)
            i = self.index[label] = len(self.index)
        return i

    def labels(self) -> list[str]:
        return list(self.index)


def load_edge_list(path, format: Optional[str] = None, square: bool = False, strict_binary: bool = True) -> BiAdjacency:
    """Read a TSV edge list or a Matrix Market file into a :class:`BiAdjacency`.

    For edge lists, ``square=True`` puts sources and targets in one shared
    label universe (needed when rows and columns are the same nodes);
    otherwise rows are the distinct sources and columns the distinct
    targets, each in order of first appearance. Duplicate edges collapse.
    """
    format = format or guess_format(path)
    if format not in FORMATS:
        raise ValueError(f"unknown format {format!r}; expected one of {FORMATS}")
    text = Path(path).read_text(encoding="utf-8")
    if format == "mtx":
        return _parse_mtx(text, strict_binary)
    return _parse_tsv(text, square, strict_binary)


def _parse_tsv(text: str, square: bool, strict: bool) -> BiAdjacency:
    declared: dict[str, list[str]] = {}
    body = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#@"):
            key, *labs = line[2:].split()
            declared[key] = labs
            continue
        if line.startswith("#"):
            continue
        body.append((lineno, line.split()))

    if "rows" in declared or "cols" in declared:
        rows = _Universe(declared.get("rows", []))
        cols = _Universe(declared.get("cols", []))
    elif square:
        rows = cols = _Universe()
    else:
        rows, cols = _Universe(), _Universe()

    edges = []
    for lineno, tok in body:
        if len(tok) not in (2, 3):
            raise ParseError(f"expected 'src dst [weight]', got {len(tok)} fields", lineno)
        w = _binary(tok[2], lineno, strict) if len(tok) == 3 else 1
        i = rows.get(tok[0], lineno)
        j = cols.get(tok[1], lineno)
        if w:
            edges.append((i, j))
    rl, cl = rows.labels(), cols.labels()
    return BiAdjacency.from_edges(len(rl), len(cl), edges, rl, cl)


def _parse_mtx(text: str, strict: bool) -> BiAdjacency:
    lines = text.splitlines()
    if not lines:
        return BiAdjacency.from_edges(0, 0, [])
    head = lines[0].split()
    if len(head) < 5 or head[0].lower() != "%%matrixmarket":
        raise ParseError("missing %%MatrixMarket header", 1)
    obj, fmt, field, symmetry = (h.lower() for h in head[1:5])
    if obj != "matrix" or fmt != "coordinate":
        raise ParseError(f"only 'matrix coordinate' is supported, got '{obj} {fmt}'", 1)
    if field not in ("pattern", "integer", "real"):
        raise ParseError(f"unsupported field {field!r}", 1)
    if symmetry not in ("general", "symmetric"):
        raise ParseError(f"unsupported symmetry {symmetry!r}", 1)

    declared: dict[str, list[str]] = {}
    size = None
    edges = []
    seen = 0
    for lineno, raw in enumerate(lines[1:], start=2):
        line = raw.strip()
        if line.startswith("%@"):
            key, *labs = line[2:].split()
            declared[key] = labs
            continue
        if not line or line.startswith("%"):
            continue
        tok = line.split()
        try:
            nums = [int(t) for t in tok[:2]]
        except ValueError:
            raise ParseError(f"bad integer in {line!r}", lineno) from None
        if size is None:
            if len(tok) != 3:
                raise ParseError("size line must be 'rows cols nnz'", lineno)
            size = (nums[0], nums[1], int(tok[2]))
            continue
        want = 2 if field == "pattern" else 3
        if len(tok) != want:
            raise ParseError(f"expected {want} fields for a {field} entry", lineno)
        i, j = nums[0] - 1, nums[1] - 1
        if not (0 <= i < size[0] and 0 <= j < size[1]):
            raise ParseError(f"entry ({i + 1}, {j + 1}) outside {size[0]}x{size[1]}", lineno)
        w = 1 if field == "pattern" else _binary(tok[2], lineno, strict)
        seen += 1
        if w:
            edges.append((i, j))
            if symmetry == "symmetric" and i != j:
                edges.append((j, i))
    if size is None:
        raise ParseError("missing size line", len(lines))
    if seen != size[2]:
        raise ParseError(f"header announces {size[2]} entries, found {seen}", len(lines))
    n_r, n_c, _ = size
    rl = declared.get("rows") or list(index_labels(n_r))
    cl = declared.get("cols") or list(index_labels(n_c))
    if len(rl) != n_r or len(cl) != n_c:
        raise ParseError("label directive length does not match the size line")
    return BiAdjacency.from_edges(n_r, n_c, edges, rl, cl)


def _write_lines(path, comment: str, header_lines: Iterable[str], body: Iterable[str]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as fh:
        for h in header_lines:
            fh.write(f"{comment} {h}\n")
        for line in body:
            fh.write(line + "\n")


def write_edge_list(a: BiAdjacency, path, header_lines: Iterable[str] = ()) -> None:
    e = a.edges()
    body = [
        "#@rows " + " ".join(a.row_labels),
        "#@cols " + " ".join(a.col_labels),
        *(f"{a.row_labels[i]}\t{a.col_labels[j]}" for i, j in e),
    ]
    _write_lines(path, "#", header_lines, body)


def write_matrix_market(a: BiAdjacency, path, header_lines: Iterable[str] = ()) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    e = a.edges()
    with path.open("w", encoding="utf-8") as fh:
        fh.write("%%MatrixMarket matrix coordinate pattern general\n")
        for h in header_lines:
            fh.write(f"% {h}\n")
        fh.write("%@rows " + " ".join(a.row_labels) + "\n")
        fh.write("%@cols " + " ".join(a.col_labels) + "\n")
        fh.write(f"{a.n_r} {a.n_c} {len(e)}\n")
        for i, j in e:
            fh.write(f"{i + 1} {j + 1}\n")


def save_graph(a: BiAdjacency, path, format: Optional[str] = None, header_lines: Iterable[str] = ()) -> None:
    if (format or guess_format(path)) == "mtx":
        write_matrix_market(a, path, header_lines)
    else:
        write_edge_list(a, path, header_lines)


def write_memberships(pi: MembershipMatrix, path, header_lines: Iterable[str] = ()) -> None:
    """CSV with header ``label,pi_1,...,pi_K``; floats written round-trip exact."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    labels = pi.labels or index_labels(pi.n)
    with path.open("w", encoding="utf-8", newline="") as fh:
        for h in header_lines:
            fh.write(f"# {h}\n")
        w = csv.writer(fh)
        w.writerow(["label"] + [f"pi_{k + 1}" for k in range(pi.K)])
        for lab, row in zip(labels, pi.weights):
            w.writerow([lab] + [repr(float(x)) for x in row])


def read_memberships(path) -> MembershipMatrix:
    with Path(path).open(encoding="utf-8", newline="") as fh:
        rows = [r for r in csv.reader(line for line in fh if not line.startswith("#"))]
    if not rows or rows[0][0] != "label":
        raise ParseError(f"{path}: expected header 'label,pi_1,...'", 1)
    labels = [r[0] for r in rows[1:]]
    try:
        w = np.array([[float(x) for x in r[1:]] for r in rows[1:]], dtype=float)
    except ValueError as exc:
        raise ParseError(f"{path}: {exc}") from None
    return MembershipMatrix(w.reshape(len(labels), len(rows[0]) - 1), labels)


def _label_key(label: str):
    try:
        return (0, int(label), "")
    except ValueError:
        return (1, 0, label)


def _aligned_square(a: BiAdjacency) -> BiAdjacency:
    if a.n_r != a.n_c or set(a.row_labels) != set(a.col_labels):
        raise NotSquare(f"need identical row and column label sets, got {a.shape}")
    if a.row_labels == a.col_labels:
        return a
    pos = {lab: j for j, lab in enumerate(a.col_labels)}
    return a.submatrix(np.arange(a.n_r), [pos[lab] for lab in a.row_labels])


def largest_weak_component(a: BiAdjacency, strong: bool = False) -> BiAdjacency:
    """Subgraph induced by the largest (weakly, by default) connected component.

    Ties go to the component holding the smallest label (numeric labels
    compare as numbers).
    """
    a = _aligned_square(a)
    if a.n_r == 0:
        return a
    _, comp = connected_components(a.matrix, directed=True, connection="strong" if strong else "weak")
    sizes = np.bincount(comp)
    best = None
    for c in np.flatnonzero(sizes == sizes.max()):
        key = min(_label_key(a.row_labels[i]) for i in np.flatnonzero(comp == c))
        if best is None or key < best[0]:
            best = (key, c)
    keep = np.flatnonzero(comp == best[1])
    return a.submatrix(keep, keep)


def degree_filter(a: BiAdjacency, n_edges: int) -> BiAdjacency:
    """Keep rows with out-degree and columns with in-degree at least ``n_edges``, to a fixpoint.

    Each pass filters rows and columns simultaneously, then recomputes
    degrees on the reduced matrix. An empty result is returned with a
    ``RuntimeWarning``.
    """
    if n_edges < 1:
        raise ValueError("n_edges must be >= 1")
    rows = np.arange(a.n_r)
    cols = np.arange(a.n_c)
    M = a.matrix.tocsr()
    while True:
        rd = np.asarray(M.sum(axis=1)).ravel()
        cd = np.asarray(M.sum(axis=0)).ravel()
        kr = rd >= n_edges
        kc = cd >= n_edges
        if kr.all() and kc.all():
            break
        rows, cols = rows[kr], cols[kc]
        M = M[kr][:, kc]
        if len(rows) == 0 or len(cols) == 0:
            rows, cols = rows[:0], cols[:0]
            break
    if len(rows) == 0:
        warnings.warn(f"degree filter with n_edges={n_edges} removed every node", RuntimeWarning, stacklevel=2)
    return a.submatrix(rows, cols)


def common_submatrix(a: BiAdjacency) -> BiAdjacency:
    """Square restriction to labels present on both axes, in row order."""
    colpos = {lab: j for j, lab in enumerate(a.col_labels)}
    shared = [(i, colpos[lab]) for i, lab in enumerate(a.row_labels) if lab in colpos]
    if not shared:
        raise EmptyIntersection("row and column label sets do not intersect")
    r, c = zip(*shared)
    return a.submatrix(r, c)

