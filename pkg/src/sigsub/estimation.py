"""Incoherent and coherent signal-subgraph estimators and the coherogram."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import Infeasible, MOutOfRange, SOutOfRange
from .graph import SignalSubgraph, edge_endpoints, n_edges
from .stats import SignificanceMatrix


def coherent_capacity(V: int, m: int) -> int:
    """Edges incident to at least one of ``m`` vertices: ``m(V-1) - C(m,2)``."""
    return m * (V - 1) - m * (m - 1) // 2


def edge_order(T: SignificanceMatrix, tie_seed=None) -> np.ndarray:
    """Edge indices sorted by score descending, ties in edge-index order.

    With ``tie_seed`` set, tied edges are instead ordered by a seeded random
    permutation.
    """
    if tie_seed is None:
        return np.argsort(-T.scores, kind="stable")
    perm = np.random.default_rng(tie_seed).permutation(T.scores.shape[0])
    return perm[np.argsort(-T.scores[perm], kind="stable")]


def _check_s(T, s):
    d = n_edges(T.V)
    if not 1 <= s <= d:
        raise SOutOfRange(f"s={s} outside [1, {d}]")


def incoherent_estimate(T: SignificanceMatrix, s: int, tie_seed=None) -> SignalSubgraph:
    """The ``s`` most significant edges."""
    s = int(s)
    _check_s(T, s)
    top = edge_order(T, tie_seed)[:s]
    return SignalSubgraph.from_indices(np.sort(top), T.V, s=s)


def coherent_estimate(T: SignificanceMatrix, s: int, m: int,
                      tie_seed=None) -> SignalSubgraph:
    """Signal-subgraph of ``s`` edges incident to ``m`` signal-vertices.

    Stringency levels are the distinct scores, visited from strictest to
    loosest. At each level every vertex is weighted by its number of incident
    edges at or above the level, and the search stops at the first level
    where the ``m`` heaviest vertices (ties to lower index) reach ``s``. The
    estimate is the ``s`` most significant edges touching those vertices.
    """
    s, m = int(s), int(m)
    V = T.V
    _check_s(T, s)
    if not 1 <= m <= V:
        raise MOutOfRange(f"m={m} outside [1, {V}]")
    cap = coherent_capacity(V, m)
    if s > cap:
        raise Infeasible(f"s={s} exceeds the {cap} edges incident to m={m} vertices")

    us, vs = edge_endpoints(V)
    c = kernels.coherent_threshold(us, vs, T.scores, V, m, s)
    if c is None:  # unreachable after the capacity check
        raise Infeasible(f"no stringency level satisfies s={s}, m={m}")
    mask = T.scores >= c
    w = np.bincount(us[mask], minlength=V) + np.bincount(vs[mask], minlength=V)
    verts = np.argsort(-w, kind="stable")[:m]
    in_u = np.zeros(V, dtype=bool)
    in_u[verts] = True
    order = edge_order(T, tie_seed)
    incident = order[in_u[us[order]] | in_u[vs[order]]]
    chosen = np.sort(incident[:s])
    return SignalSubgraph.from_indices(chosen, V, s=s, m=m,
                                       vertices=tuple(sorted(verts.tolist())))


@dataclass(frozen=True, eq=False)
class Coherogram:
    """``w[v, j]`` counts edges at vertex ``v`` scoring at least ``levels[j]``."""

    levels: np.ndarray
    w: np.ndarray

    @property
    def V(self) -> int:
        return self.w.shape[0]


def coherogram(T: SignificanceMatrix) -> Coherogram:
    levels = np.unique(T.scores)[::-1]
    # position of each edge's score among the descending levels
    lvl = len(levels) - 1 - np.searchsorted(levels[::-1], T.scores)
    us, vs = edge_endpoints(T.V)
    w = np.zeros((T.V, len(levels)), dtype=np.int64)
    np.add.at(w, (us, lvl), 1)
    np.add.at(w, (vs, lvl), 1)
    return Coherogram(levels.copy(), np.cumsum(w, axis=1))
