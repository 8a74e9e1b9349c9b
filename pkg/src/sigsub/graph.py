"""Graph and dataset types shared by every other module.

Graphs are simple (undirected, binary, loop-free) and vertex-labeled, so a
graph is fully described by the upper triangle of its adjacency matrix.
Datasets store exactly that: an ``(n, d_V)`` array of edge indicators whose
columns follow :func:`edge_index` order.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    EdgeOutOfRange,
    EmptyDataset,
    NonzeroDiagonal,
    NotBinary,
    NotSquare,
    NotSymmetric,
    SOutOfRange,
    DataError,
    VTooSmall,
)

Edge = tuple[int, int]


def n_edges(V: int) -> int:
    """Number of edge slots ``d_V = V(V-1)/2`` of a simple graph."""
    return V * (V - 1) // 2


def edge_index(V: int) -> list[Edge]:
    """All vertex pairs ``(u, v)`` with ``u < v`` in lexicographic order."""
    if V < 2:
        raise VTooSmall(f"need at least 2 vertices, got V={V}")
    return [(u, v) for u in range(V) for v in range(u + 1, V)]


def edge_to_index(u: int, v: int, V: int) -> int:
    if u > v:
        u, v = v, u
    if not (0 <= u < v < V):
        raise EdgeOutOfRange(f"edge ({u},{v}) invalid for V={V}")
    return u * V - u * (u + 1) // 2 + (v - u - 1)


def index_to_edge(idx: int, V: int) -> Edge:
    d = n_edges(V)
    if not 0 <= idx < d:
        raise EdgeOutOfRange(f"edge index {idx} outside [0, {d})")
    # row u starts at u*V - u*(u+1)/2
    u = 0
    start = 0
    while start + (V - u - 1) <= idx:
        start += V - u - 1
        u += 1
    return u, u + 1 + (idx - start)


def edge_endpoints(V: int) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized endpoints ``(us, vs)`` aligned with :func:`edge_index`."""
    if V < 2:
        raise VTooSmall(f"need at least 2 vertices, got V={V}")
    return np.triu_indices(V, k=1)


def edges_to_indices(edges: Iterable[Edge], V: int) -> np.ndarray:
    return np.array([edge_to_index(u, v, V) for u, v in edges], dtype=np.intp)


class AdjacencyMatrix:
    """A validated simple graph. Build through :func:`validate_graph`."""

    __slots__ = ("_a",)

    def __init__(self, a: np.ndarray):
        a = np.array(a, dtype=np.uint8, copy=True)
        a.setflags(write=False)
        self._a = a

    @property
    def a(self) -> np.ndarray:
        return self._a

    @property
    def V(self) -> int:
        return self._a.shape[0]

    @property
    def n_edges(self) -> int:
        return int(self.upper().sum())

    def upper(self) -> np.ndarray:
        """Edge indicator vector in :func:`edge_index` order."""
        us, vs = np.triu_indices(self.V, k=1)
        return self._a[us, vs]

    @classmethod
    def from_upper(cls, x: np.ndarray, V: int) -> "AdjacencyMatrix":
        x = np.asarray(x)
        if x.shape != (n_edges(V),):
            raise DimensionMismatch(f"expected {n_edges(V)} edge slots, got {x.shape}")
        a = np.zeros((V, V), dtype=np.uint8)
        us, vs = np.triu_indices(V, k=1)
        a[us, vs] = x
        a[vs, us] = x
        return cls(a)

    def __eq__(self, other):
        if not isinstance(other, AdjacencyMatrix):
            return NotImplemented
        return np.array_equal(self._a, other._a)

    def __hash__(self):
        return hash(self._a.tobytes())

    def __repr__(self):
        return f"AdjacencyMatrix(V={self.V}, edges={self.n_edges})"


def validate_graph(raw) -> AdjacencyMatrix:
    """Check that ``raw`` is a square, binary, symmetric, hollow matrix.

    Each failure names the first offending index in row-major order. The
    input is never modified.
    """
    if isinstance(raw, AdjacencyMatrix):
        return raw
    a = np.asarray(raw)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise NotSquare(f"adjacency matrix must be square, got shape {a.shape}")
    if a.dtype.kind not in "biu":
        if a.dtype.kind == "f" and np.all(np.isfinite(a)) and np.all(a == np.round(a)):
            a = a.astype(np.int64)
        else:
            raise NotBinary(f"entries must be integers, got dtype {a.dtype}")
    bad = np.argwhere((a != 0) & (a != 1))
    if len(bad):
        i, j = map(int, bad[0])
        raise NotBinary(f"entry ({i},{j}) = {a[i, j]} is not 0/1", (i, j))
    bad = np.argwhere(a != a.T)
    if len(bad):
        i, j = map(int, bad[0])
        raise NotSymmetric(f"a[{i},{j}] != a[{j},{i}]", (i, j))
    diag = np.flatnonzero(np.diag(a))
    if len(diag):
        i = int(diag[0])
        raise NonzeroDiagonal(f"self-loop at ({i},{i})", (i, i))
    return AdjacencyMatrix(a)


class ContingencyTable(NamedTuple):
    """Edge-present counts ``k0, k1`` out of class sizes ``n0, n1``."""

    k0: int
    k1: int
    n0: int
    n1: int

    @classmethod
    def checked(cls, k0, k1, n0, n1) -> "ContingencyTable":
        k0, k1, n0, n1 = int(k0), int(k1), int(n0), int(n1)
        if n0 < 0 or n1 < 0 or not (0 <= k0 <= n0) or not (0 <= k1 <= n1):
            raise DataError(f"invalid contingency table {(k0, k1, n0, n1)}")
        return cls(k0, k1, n0, n1)

    @property
    def n(self) -> int:
        return self.n0 + self.n1

    @property
    def edge_total(self) -> int:
        return self.k0 + self.k1


@dataclass(frozen=True, eq=False)
class LabeledDataset:
    """``n`` graphs on a common vertex set with binary class labels.

    ``X[i]`` is the upper-triangle edge vector of graph ``i``. A class may be
    empty here; fitting routines reject that case themselves.
    """

    V: int
    X: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        X = np.array(self.X, dtype=np.uint8, copy=True)
        y = np.array(self.y, dtype=np.int8, copy=True).reshape(-1)
        if self.V < 2:
            raise VTooSmall(f"need at least 2 vertices, got V={self.V}")
        if X.ndim != 2 or X.shape[1] != n_edges(self.V):
            raise DimensionMismatch(
                f"edge matrix must be (n, {n_edges(self.V)}), got {X.shape}")
        if X.shape[0] != y.shape[0]:
            raise DimensionMismatch(f"{X.shape[0]} graphs but {y.shape[0]} labels")
        if X.shape[0] < 1:
            raise EmptyDataset("dataset needs at least one graph")
        if np.any(X > 1):
            raise DataError("edge indicators must be 0/1")
        if np.any((y != 0) & (y != 1)):
            raise DataError("labels must be 0 or 1")
        X.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

    @classmethod
    def from_graphs(cls, graphs: Sequence, labels: Sequence[int]) -> "LabeledDataset":
        if len(graphs) == 0:
            raise EmptyDataset("dataset needs at least one graph")
        mats = [validate_graph(g) for g in graphs]
        V = mats[0].V
        for i, g in enumerate(mats):
            if g.V != V:
                raise DimensionMismatch(f"graph {i} has V={g.V}, expected {V}")
        return cls(V, np.stack([g.upper() for g in mats]), np.asarray(labels))

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def d(self) -> int:
        return self.X.shape[1]

    @property
    def n0(self) -> int:
        return int(np.count_nonzero(self.y == 0))

    @property
    def n1(self) -> int:
        return int(np.count_nonzero(self.y == 1))

    @property
    def graphs(self) -> list[AdjacencyMatrix]:
        return [AdjacencyMatrix.from_upper(x, self.V) for x in self.X]

    def graph(self, i: int) -> AdjacencyMatrix:
        return AdjacencyMatrix.from_upper(self.X[i], self.V)

    def subset(self, idx) -> "LabeledDataset":
        idx = np.asarray(idx, dtype=np.intp)
        return LabeledDataset(self.V, self.X[idx], self.y[idx])

    def relabel(self, y) -> "LabeledDataset":
        return LabeledDataset(self.V, self.X, y)

    def class_counts(self) -> tuple[np.ndarray, np.ndarray]:
        """Per-edge edge-present counts ``(k0, k1)`` as int64 vectors."""
        X = self.X.astype(np.int64)
        k1 = X[self.y == 1].sum(axis=0)
        k0 = X[self.y == 0].sum(axis=0)
        return k0, k1


def contingency_table(ds: LabeledDataset, e: Edge) -> ContingencyTable:
    idx = edge_to_index(int(e[0]), int(e[1]), ds.V)
    col = ds.X[:, idx].astype(np.int64)
    k1 = int(col[ds.y == 1].sum())
    k0 = int(col[ds.y == 0].sum())
    return ContingencyTable(k0, k1, ds.n0, ds.n1)


@dataclass(frozen=True)
class SignalSubgraph:
    """An estimated (or planted) signal-subgraph.

    ``edges`` is kept sorted in edge-index order. ``vertices`` is the
    signal-vertex set for coherent estimates and ``None`` otherwise.
    """

    V: int
    edges: tuple[Edge, ...]
    s: int
    m: int | None = None
    vertices: tuple[int, ...] | None = None
    _idx: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        d = n_edges(self.V)
        edges = tuple(sorted({(min(u, v), max(u, v)) for u, v in self.edges}))
        if not edges:
            raise SOutOfRange("signal-subgraph must contain at least one edge")
        if len(edges) != min(self.s, d):
            raise SOutOfRange(f"{len(edges)} edges for budget s={self.s}")
        idx = edges_to_indices(edges, self.V)
        idx.setflags(write=False)
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "_idx", idx)
        if self.vertices is not None:
            verts = tuple(sorted(set(int(v) for v in self.vertices)))
            if self.m is not None and len(verts) > self.m:
                raise DataError(f"{len(verts)} signal-vertices exceed m={self.m}")
            vs = set(verts)
            for u, v in edges:
                if u not in vs and v not in vs:
                    raise DataError(f"edge ({u},{v}) not incident to a signal-vertex")
            object.__setattr__(self, "vertices", verts)

    @property
    def indices(self) -> np.ndarray:
        return self._idx

    def __len__(self):
        return len(self.edges)

    def __contains__(self, e):
        u, v = e
        return (min(u, v), max(u, v)) in set(self.edges)

    @classmethod
    def from_indices(cls, idx, V, s=None, m=None, vertices=None) -> "SignalSubgraph":
        us, vs = edge_endpoints(V)
        idx = np.asarray(idx, dtype=np.intp)
        edges = tuple(zip(us[idx].tolist(), vs[idx].tolist()))
        return cls(V, edges, len(edges) if s is None else s, m, vertices)

    @classmethod
    def complete(cls, V: int) -> "SignalSubgraph":
        """The whole edge set; plugging it in gives the naive Bayes classifier."""
        return cls.from_indices(np.arange(n_edges(V)), V)
