"""Per-edge significance tests and the two-sample Kolmogorov-Smirnov test.

Every edge test is summarized as a *score* where larger means more
significant: ``-log(p)`` for the p-value tests (p floored at 1e-300) and the
raw statistic for :func:`mle_abs_diff`.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from . import kernels
from .errors import DimensionMismatch, EmptyClass, EmptyInput
from .graph import ContingencyTable, LabeledDataset, edge_endpoints, n_edges

P_FLOOR = 1e-300


class TestStatisticKind(str, enum.Enum):
    FISHER = "fisher"
    CHI_SQUARED = "chi2"
    MLE_ABS_DIFF = "mle"

    __test__ = False  # keep pytest from collecting this

    @classmethod
    def parse(cls, value) -> "TestStatisticKind":
        if isinstance(value, cls):
            return value
        aliases = {"fisher": cls.FISHER, "fisherexact": cls.FISHER,
                   "chi2": cls.CHI_SQUARED, "chisquared": cls.CHI_SQUARED,
                   "mle": cls.MLE_ABS_DIFF, "mleabsdiff": cls.MLE_ABS_DIFF}
        key = str(value).lower().replace("_", "").replace("-", "")
        try:
            return aliases[key]
        except KeyError:
            raise ValueError(f"unknown test statistic {value!r}") from None

    @property
    def has_pvalue(self) -> bool:
        return self is not TestStatisticKind.MLE_ABS_DIFF


def score_from_pvalue(p):
    return -np.log(np.maximum(p, P_FLOOR))


# single-table tests ---------------------------------------------------------

def fisher_exact_pvalue(t: ContingencyTable) -> float:
    """Two-sided Fisher exact p-value (minimum-likelihood rule)."""
    t = ContingencyTable.checked(*t)
    return float(kernels.fisher_pvalues([t.k0], [t.k1], t.n0, t.n1)[0])


def _chi2_arrays(k0, k1, n0, n1):
    k0 = np.asarray(k0, dtype=np.float64)
    k1 = np.asarray(k1, dtype=np.float64)
    n0 = np.broadcast_to(np.asarray(n0, dtype=np.float64), k0.shape)
    n1 = np.broadcast_to(np.asarray(n1, dtype=np.float64), k0.shape)
    N = n0 + n1
    r1 = k0 + k1
    r2 = N - r1
    denom = r1 * r2 * n0 * n1
    stat = np.zeros_like(k0)
    ok = denom > 0
    cross = k0 * (n1 - k1) - k1 * (n0 - k0)
    stat[ok] = N[ok] * cross[ok] ** 2 / denom[ok]
    p = np.ones_like(k0)
    # df = 1: survival function is Q(1/2, x/2)
    p[ok] = special.gammaincc(0.5, stat[ok] / 2.0)
    return stat, p


def chi_squared_statistic(t: ContingencyTable) -> float:
    t = ContingencyTable.checked(*t)
    return float(_chi2_arrays([t.k0], [t.k1], t.n0, t.n1)[0][0])


def chi_squared_pvalue(t: ContingencyTable) -> float:
    """Pearson chi-squared p-value, 1 dof, no continuity correction.

    A zero margin makes an expected count vanish; such tables get p = 1.
    """
    t = ContingencyTable.checked(*t)
    return float(_chi2_arrays([t.k0], [t.k1], t.n0, t.n1)[1][0])


def mle_abs_diff(t: ContingencyTable) -> float:
    t = ContingencyTable.checked(*t)
    if t.n0 == 0 or t.n1 == 0:
        raise EmptyClass("absolute MLE difference needs both classes")
    return abs(t.k0 / t.n0 - t.k1 / t.n1)


# significance matrix --------------------------------------------------------

@dataclass(frozen=True, eq=False)
class SignificanceMatrix:
    """Per-edge scores aligned with :func:`sigsub.graph.edge_index`."""

    V: int
    scores: np.ndarray
    pvalues: np.ndarray | None = None
    kind: TestStatisticKind | None = None

    def __post_init__(self):
        scores = np.array(self.scores, dtype=np.float64, copy=True)
        if scores.shape != (n_edges(self.V),):
            raise DimensionMismatch(
                f"expected {n_edges(self.V)} scores, got shape {scores.shape}")
        if not np.all(np.isfinite(scores)):
            raise ValueError("significance scores must be finite")
        scores.setflags(write=False)
        object.__setattr__(self, "scores", scores)
        if self.pvalues is not None:
            pv = np.array(self.pvalues, dtype=np.float64, copy=True)
            pv.setflags(write=False)
            object.__setattr__(self, "pvalues", pv)

    @classmethod
    def from_pvalues(cls, V, pvalues, kind=None) -> "SignificanceMatrix":
        pvalues = np.asarray(pvalues, dtype=np.float64)
        return cls(V, score_from_pvalue(pvalues), pvalues, kind)

    def as_matrix(self) -> np.ndarray:
        """Symmetric ``V x V`` score matrix with a zero diagonal."""
        out = np.zeros((self.V, self.V))
        us, vs = edge_endpoints(self.V)
        out[us, vs] = self.scores
        out[vs, us] = self.scores
        return out


def significance_matrix(ds: LabeledDataset, kind="fisher") -> SignificanceMatrix:
    kind = TestStatisticKind.parse(kind)
    n0, n1 = ds.n0, ds.n1
    if n0 == 0 or n1 == 0:
        raise EmptyClass(f"significance needs both classes (n0={n0}, n1={n1})")
    k0, k1 = ds.class_counts()
    if kind is TestStatisticKind.FISHER:
        p = kernels.fisher_pvalues(k0, k1, n0, n1)
        return SignificanceMatrix.from_pvalues(ds.V, p, kind)
    if kind is TestStatisticKind.CHI_SQUARED:
        p = _chi2_arrays(k0, k1, n0, n1)[1]
        return SignificanceMatrix.from_pvalues(ds.V, p, kind)
    return SignificanceMatrix(ds.V, np.abs(k0 / n0 - k1 / n1), None, kind)


# Kolmogorov-Smirnov ---------------------------------------------------------

def kolmogorov_sf(lam: float, tol: float = 1e-12) -> float:
    """Kolmogorov distribution tail ``Q(lam) = 2 sum (-1)^(k-1) exp(-2 k^2 lam^2)``.

    The alternating series converges slowly for small ``lam``; below 1.18 the
    equivalent theta-function form is summed instead.
    """
    if lam <= 0.0:
        return 1.0
    if lam < 1.18:
        y = math.pi ** 2 / (8.0 * lam * lam)
        total = 0.0
        k = 1
        while True:
            term = math.exp(-(2 * k - 1) ** 2 * y)
            total += term
            if term < tol * max(total, 1e-300) or k > 1000:
                break
            k += 1
        return min(1.0, max(0.0, 1.0 - math.sqrt(2.0 * math.pi) / lam * total))
    total = 0.0
    sign = 1.0
    k = 1
    while True:
        term = math.exp(-2.0 * k * k * lam * lam)
        total += sign * term
        if term < tol:
            break
        sign = -sign
        k += 1
    return min(1.0, max(0.0, 2.0 * total))


def ks_two_sample(xs, ys) -> tuple[float, float]:
    """Two-sample KS statistic ``D`` and its asymptotic p-value.

    Uses the effective size ``ne = n m / (n + m)`` with the small-sample
    correction ``lam = (sqrt(ne) + 0.12 + 0.11 / sqrt(ne)) D``.
    """
    x = np.sort(np.asarray(xs, dtype=np.float64).ravel())
    y = np.sort(np.asarray(ys, dtype=np.float64).ravel())
    if x.size == 0 or y.size == 0:
        raise EmptyInput("both samples must be nonempty")
    grid = np.concatenate([x, y])
    cdf_x = np.searchsorted(x, grid, side="right") / x.size
    cdf_y = np.searchsorted(y, grid, side="right") / y.size
    D = float(np.max(np.abs(cdf_x - cdf_y)))
    ne = x.size * y.size / (x.size + y.size)
    rt = math.sqrt(ne)
    lam = (rt + 0.12 + 0.11 / rt) * D
    return D, kolmogorov_sf(lam)
