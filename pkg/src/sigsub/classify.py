"""Parameter estimation and the Bayes plug-in graph classifier."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, EmptyClass, EmptyDataset, KOutOfRange
from .graph import AdjacencyMatrix, LabeledDataset, SignalSubgraph, validate_graph


def smoothing_constant(n: int) -> float:
    return 1.0 / (10.0 * n)


def _clamped_rates(k, n_y, eta):
    k = np.asarray(k, dtype=np.float64)
    p = k / n_y
    p = np.where(k == 0, eta, p)
    return np.where(k == n_y, 1.0 - eta, p)


def estimate_likelihoods(ds: LabeledDataset, sg: SignalSubgraph,
                         eta_mode: str = "total") -> np.ndarray:
    """Smoothed per-class edge probabilities, shape ``(2, len(sg))``.

    A class that never (always) shows an edge gets ``eta`` (``1 - eta``)
    instead of the MLE 0 (1). ``eta = 1/(10 n)`` with ``n`` the total sample
    size, or the class size when ``eta_mode="class"``.
    """
    n0, n1 = ds.n0, ds.n1
    if n0 == 0 or n1 == 0:
        raise EmptyClass(f"likelihoods need both classes (n0={n0}, n1={n1})")
    cols = ds.X[:, sg.indices].astype(np.int64)
    out = np.empty((2, len(sg)))
    for y, n_y in ((0, n0), (1, n1)):
        k = cols[ds.y == y].sum(axis=0)
        eta = smoothing_constant(ds.n if eta_mode == "total" else n_y)
        out[y] = _clamped_rates(k, n_y, eta)
    return out


def estimate_priors(ds: LabeledDataset) -> tuple[float, float]:
    if ds.n < 1:
        raise EmptyDataset("priors need at least one sample")
    return ds.n0 / ds.n, ds.n1 / ds.n


@dataclass(frozen=True, eq=False)
class FittedModel:
    """Everything the plug-in classifier needs.

    ``lik[y, j]`` is the estimated probability of edge ``subgraph.edges[j]``
    in class ``y``.
    """

    subgraph: SignalSubgraph
    lik: np.ndarray
    priors: tuple[float, float]
    n: int
    eta: float
    stat: str | None = None
    eta_mode: str = "total"
    _weights: tuple = field(init=False, repr=False)

    def __post_init__(self):
        lik = np.array(self.lik, dtype=np.float64, copy=True)
        if lik.shape != (2, len(self.subgraph)):
            raise DimensionMismatch(f"likelihood table shape {lik.shape} does not "
                                    f"match {len(self.subgraph)} edges")
        lik.setflags(write=False)
        object.__setattr__(self, "lik", lik)
        object.__setattr__(self, "priors", (float(self.priors[0]), float(self.priors[1])))
        with np.errstate(divide="ignore"):
            present = np.log(lik[1]) - np.log(lik[0])
            absent = np.log1p(-lik[1]) - np.log1p(-lik[0])
            prior = np.log(self.priors[1]) - np.log(self.priors[0])
        object.__setattr__(self, "_weights", (present, absent, prior))

    @property
    def V(self) -> int:
        return self.subgraph.V

    def margins(self, X) -> np.ndarray:
        """Log-posterior margins ``log score(1) - log score(0)`` for edge rows."""
        X = np.asarray(X)
        if X.ndim == 1:
            X = X[None, :]
        if X.shape[1] != self.subgraph.V * (self.subgraph.V - 1) // 2:
            raise DimensionMismatch(f"edge vectors of length {X.shape[1]} do not "
                                    f"match V={self.V}")
        present, absent, prior = self._weights
        A = X[:, self.subgraph.indices].astype(bool)
        return np.where(A, present, absent).sum(axis=1) + prior

    def predict(self, X) -> np.ndarray:
        return (self.margins(X) > 0).astype(np.int8)


def fit(ds: LabeledDataset, sg: SignalSubgraph, eta_mode: str = "total",
        stat: str | None = None) -> FittedModel:
    lik = estimate_likelihoods(ds, sg, eta_mode)
    n = ds.n
    eta = smoothing_constant(n)
    return FittedModel(sg, lik, estimate_priors(ds), n, eta, stat, eta_mode)


def classify(model: FittedModel, g) -> tuple[int, float]:
    """Predicted label and log-posterior margin; an exact tie goes to class 0."""
    g = validate_graph(g)
    if g.V != model.V:
        raise DimensionMismatch(f"graph has V={g.V}, model expects V={model.V}")
    margin = float(model.margins(g.upper())[0])
    return int(margin > 0), margin


# graph kNN ------------------------------------------------------------------

def frobenius_distances(train: LabeledDataset, x: np.ndarray) -> np.ndarray:
    """Frobenius distance from edge vector ``x`` to every training graph.

    Each differing upper-triangle entry appears twice in the full matrix.
    """
    ham = np.count_nonzero(train.X != np.asarray(x, dtype=np.uint8), axis=1)
    return np.sqrt(2.0 * ham)


def knn_frobenius_classify(train: LabeledDataset, g, k: int) -> int:
    """Majority vote of the ``k`` nearest training graphs.

    Distance ties go to the lower training index; vote ties go to the label
    of the single nearest neighbour.
    """
    k = int(k)
    if not 1 <= k <= train.n:
        raise KOutOfRange(f"k={k} outside [1, {train.n}]")
    if isinstance(g, AdjacencyMatrix) or np.ndim(g) == 2:
        g = validate_graph(g)
        if g.V != train.V:
            raise DimensionMismatch(f"graph has V={g.V}, training set V={train.V}")
        x = g.upper()
    else:
        x = np.asarray(g)
    near = np.argsort(frobenius_distances(train, x), kind="stable")[:k]
    votes = np.bincount(train.y[near], minlength=2)
    if votes[0] == votes[1]:
        return int(train.y[near[0]])
    return int(np.argmax(votes))
