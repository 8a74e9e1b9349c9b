"""Samplers for the homogeneous two-class model and for fitted models.

Random streams
--------------
All sampling uses numpy's ``Generator(PCG64)`` seeded through
``SeedSequence``. A dataset drawn with seed ``k`` uses
``Generator(PCG64(SeedSequence(k)))`` and consumes, in order: one uniform per
sample for the label (prior-sampled mode only; label 1 iff ``u >= pi``),
then one uniform per edge slot, row-major over ``(sample, edge index)``; an
edge is present iff its uniform is below its probability. Independent trials
derive their seeds with :func:`trial_seeds`, the ``SeedSequence.spawn``
recipe ``SeedSequence(entropy=k, spawn_key=(i,))``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, asdict

import numpy as np
from scipy.special import gammaln

from .classify import FittedModel
from .errors import InfeasibleSpec, MissingNuisance, SOutOfRange, VTooSmall
from .graph import LabeledDataset, SignalSubgraph, edge_endpoints, n_edges
from .estimation import coherent_capacity


def make_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    if isinstance(seed, np.random.SeedSequence):
        return np.random.Generator(np.random.PCG64(seed))
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))


def trial_seeds(seed: int, count: int) -> list[np.random.SeedSequence]:
    """Per-trial seed sequences split off ``seed``; stable for any ``count``."""
    return [np.random.SeedSequence(entropy=seed, spawn_key=(i,)) for i in range(count)]


@dataclass(frozen=True)
class HomogeneousModelSpec:
    """The homogeneous model: class 0 is Erdos-Renyi(p); in class 1 the ``s``
    signal-edges on ``m`` signal-vertices have probability ``q`` instead.

    ``pi`` is the class-0 prior. ``q == p`` is allowed and gives the null
    model with no class signal.
    """

    V: int
    m: int
    s: int
    pi: float
    p: float
    q: float
    seed: int = 0
    placement: str = "lexicographic"

    def __post_init__(self):
        if self.V < 2:
            raise InfeasibleSpec(f"V={self.V} too small")
        if not (0 < self.p < 1 and 0 < self.q < 1):
            raise InfeasibleSpec(f"edge probabilities must lie in (0,1): p={self.p}, q={self.q}")
        if not 0 <= self.pi <= 1:
            raise InfeasibleSpec(f"prior pi={self.pi} outside [0,1]")
        if not 1 <= self.m <= self.V:
            raise InfeasibleSpec(f"m={self.m} outside [1, {self.V}]")
        if not 1 <= self.s <= coherent_capacity(self.V, self.m):
            raise InfeasibleSpec(f"s={self.s} not coverable by m={self.m} vertices "
                                 f"(capacity {coherent_capacity(self.V, self.m)})")
        if self.placement not in ("lexicographic", "random"):
            raise InfeasibleSpec(f"unknown placement {self.placement!r}")

    def to_dict(self):
        return asdict(self)


def planted_subgraph(spec: HomogeneousModelSpec) -> SignalSubgraph:
    """The true signal-subgraph of ``spec``.

    Lexicographic placement takes the first ``s`` edges incident to vertices
    ``0..m-1``. Random placement draws ``m`` vertices and ``s`` of their
    incident edges from a stream keyed on ``(seed, "placement")``.
    """
    V, m = spec.V, spec.m
    us, vs = edge_endpoints(V)
    if spec.placement == "lexicographic":
        verts = np.arange(m)
        cand = np.flatnonzero(us < m)
        idx = cand[: spec.s]
    else:
        rng = make_rng(np.random.SeedSequence(entropy=spec.seed, spawn_key=(2**31,)))
        verts = np.sort(rng.choice(V, size=m, replace=False))
        inside = np.zeros(V, dtype=bool)
        inside[verts] = True
        cand = np.flatnonzero(inside[us] | inside[vs])
        idx = np.sort(rng.choice(cand, size=spec.s, replace=False))
    # keep only vertices actually needed to cover the planted edges
    used = tuple(v for v in verts.tolist() if np.any((us[idx] == v) | (vs[idx] == v)))
    return SignalSubgraph.from_indices(idx, V, s=spec.s, m=m, vertices=used)


def edge_probabilities(spec: HomogeneousModelSpec) -> np.ndarray:
    """Class-conditional edge probabilities, shape ``(2, d_V)``."""
    d = n_edges(spec.V)
    P = np.full((2, d), spec.p)
    P[1, planted_subgraph(spec).indices] = spec.q
    return P


def true_model(spec: HomogeneousModelSpec) -> FittedModel:
    """The Bayes-optimal classifier of ``spec`` as a :class:`FittedModel`."""
    truth = planted_subgraph(spec)
    lik = np.vstack([np.full(len(truth), spec.p), np.full(len(truth), spec.q)])
    return FittedModel(truth, lik, (spec.pi, 1.0 - spec.pi), 0, 0.0, "truth")


def class_sizes(n: int, pi: float) -> tuple[int, int]:
    n0 = int(math.floor(pi * n + 0.5))
    return n0, n - n0


def _draw_edges(rng, P, y, chunk=2048):
    # chunked draws consume the stream exactly like one (n, d) draw
    X = np.empty((y.shape[0], P.shape[1]), dtype=np.uint8)
    for start in range(0, y.shape[0], chunk):
        rows = y[start:start + chunk]
        X[start:start + chunk] = rng.random((rows.shape[0], P.shape[1])) < P[rows]
    return X


def sample_homogeneous(spec: HomogeneousModelSpec, n: int, mode: str = "prior",
                       n0: int | None = None, n1: int | None = None,
                       seed=None) -> tuple[LabeledDataset, SignalSubgraph]:
    """Draw ``n`` labeled graphs and return them with the planted truth.

    ``mode="prior"`` draws each label from the prior. ``mode="conditioned"``
    fixes the class sizes (``n0`` class-0 graphs first, then ``n1``); they
    default to ``round(pi n)`` and the remainder.
    """
    if n < 1:
        raise InfeasibleSpec("need n >= 1 samples")
    rng = make_rng(spec.seed if seed is None else seed)
    if mode == "prior":
        y = (rng.random(n) >= spec.pi).astype(np.int8)
    elif mode == "conditioned":
        if n0 is None and n1 is None:
            n0, n1 = class_sizes(n, spec.pi)
        elif n0 is None:
            n0 = n - n1
        elif n1 is None:
            n1 = n - n0
        if n0 < 0 or n1 < 0 or n0 + n1 != n:
            raise InfeasibleSpec(f"class sizes {n0}+{n1} do not add up to n={n}")
        y = np.repeat(np.array([0, 1], dtype=np.int8), [n0, n1])
    else:
        raise ValueError(f"unknown sampling mode {mode!r}")
    P = edge_probabilities(spec)
    X = _draw_edges(rng, P, y)
    return LabeledDataset(spec.V, X, y), planted_subgraph(spec)


def pooled_edge_probabilities(ds: LabeledDataset) -> np.ndarray:
    """Per-edge frequency over all samples, ignoring class."""
    return ds.X.mean(axis=0)


def sample_from_fitted(model: FittedModel, nuisance, n0: int, n1: int,
                       seed=None) -> LabeledDataset:
    """Synthetic data from a fitted model.

    Signal-subgraph edges follow the model's class-conditional likelihoods;
    every other edge follows ``nuisance`` (pooled probabilities) in both
    classes. ``n0`` class-0 graphs come first.
    """
    V = model.V
    d = n_edges(V)
    nuisance = np.asarray(nuisance, dtype=np.float64)
    if nuisance.shape != (d,):
        raise MissingNuisance(f"nuisance must cover all {d} edges, got {nuisance.shape}")
    outside = np.ones(d, dtype=bool)
    outside[model.subgraph.indices] = False
    if np.any(~np.isfinite(nuisance[outside])):
        raise MissingNuisance("nuisance probabilities missing outside the signal-subgraph")
    P = np.vstack([nuisance, nuisance]).copy()
    P[:, model.subgraph.indices] = model.lik
    y = np.repeat(np.array([0, 1], dtype=np.int8), [n0, n1])
    rng = make_rng(seed)
    return LabeledDataset(V, _draw_edges(rng, P, y), y)


def subgraph_count_log2(V: int, s: int | None = None, m: int | None = None) -> float:
    """log2 of the number of candidate signal-subgraphs.

    Unconstrained: ``d_V``. With ``s``: ``log2 C(d_V, s)``. With ``s`` and
    ``m = 1``: ``log2(V C(V-1, s))``, which counts (vertex, edge set) pairs
    and so upper-bounds the distinct subgraphs.
    """
    if V < 2:
        raise VTooSmall(f"need at least 2 vertices, got V={V}")
    d = n_edges(V)
    if s is None:
        return float(d)
    if not 0 <= s <= d:
        raise SOutOfRange(f"s={s} outside [0, {d}]")

    def log2_comb(a, b):
        return float((gammaln(a + 1) - gammaln(b + 1) - gammaln(a - b + 1)) / math.log(2))

    if m is None:
        return log2_comb(d, s)
    if m != 1:
        raise ValueError("vertex-constrained counts are defined for m = 1 only")
    if s > V - 1:
        raise SOutOfRange(f"s={s} exceeds the V-1={V - 1} edges of one vertex")
    return math.log2(V) + log2_comb(V - 1, s)
