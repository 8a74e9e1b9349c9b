"""Cross-validation, hyper-parameter search and evaluation statistics."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .classify import FittedModel, fit, smoothing_constant, _clamped_rates
from .errors import (
    DegenerateFold,
    DivisionDegenerate,
    EmptyTruth,
    GridMismatch,
    HyperParameterError,
    Infeasible,
    LengthMismatch,
    MOutOfRange,
    SOutOfRange,
    TooFewSamples,
    DataError,
)
from .estimation import coherent_capacity, coherent_estimate, edge_order, incoherent_estimate
from .graph import LabeledDataset, SignalSubgraph, n_edges
from .parallel import map_jobs
from .simulate import HomogeneousModelSpec, make_rng, sample_homogeneous, trial_seeds, true_model
from .stats import TestStatisticKind, significance_matrix


# schemes and grids ----------------------------------------------------------

@dataclass(frozen=True, eq=False)
class CvScheme:
    """How to split data for error estimation.

    ``kfold`` partitions the samples into ``folds`` groups whose sizes differ
    by at most one (shuffled first when ``seed`` is set); ``loo`` is k-fold
    with one sample per fold; ``heldout`` trains on everything and tests on
    the separate ``test`` dataset.
    """

    kind: str
    folds: int | None = None
    seed: int | None = None
    test: LabeledDataset | None = None

    def __post_init__(self):
        if self.kind not in ("kfold", "loo", "heldout"):
            raise ValueError(f"unknown scheme {self.kind!r}")
        if self.kind == "kfold" and (self.folds is None or self.folds < 2):
            raise ValueError("k-fold needs at least 2 folds")
        if self.kind == "heldout" and self.test is None:
            raise ValueError("held-out scheme needs a test dataset")

    @classmethod
    def kfold(cls, folds: int, seed: int | None = None) -> "CvScheme":
        return cls("kfold", folds, seed)

    @classmethod
    def loo(cls) -> "CvScheme":
        return cls("loo")

    @classmethod
    def heldout(cls, test: LabeledDataset) -> "CvScheme":
        return cls("heldout", test=test)

    def partition(self, n: int) -> list[np.ndarray]:
        """Test-index groups for k-fold and leave-one-out."""
        if self.kind == "loo":
            return [np.array([i]) for i in range(n)]
        if self.kind == "kfold":
            if self.folds > n:
                raise DegenerateFold(f"{self.folds} folds for {n} samples")
            idx = np.arange(n) if self.seed is None else make_rng(self.seed).permutation(n)
            return [np.sort(f) for f in np.array_split(idx, self.folds)]
        raise ValueError("held-out schemes have no partition")

    def describe(self) -> dict:
        out = {"kind": self.kind}
        if self.kind == "kfold":
            out.update(folds=self.folds, seed=self.seed)
        if self.kind == "heldout":
            out["n_test"] = self.test.n
        return out


@dataclass(frozen=True)
class HyperGrid:
    """Candidate ``(s, m)`` values; ``m = V`` (or ``None``) means incoherent."""

    s_values: tuple[int, ...]
    m_values: tuple[int, ...]

    def __post_init__(self):
        s = tuple(sorted(set(int(v) for v in self.s_values)))
        m = tuple(sorted(set(int(v) for v in self.m_values)))
        if not s or not m:
            raise ValueError("hyper-parameter grid must be nonempty")
        object.__setattr__(self, "s_values", s)
        object.__setattr__(self, "m_values", m)

    def validate(self, V: int):
        d = n_edges(V)
        if self.s_values[0] < 1 or self.s_values[-1] > d:
            raise SOutOfRange(f"s grid must lie in [1, {d}]")
        if self.m_values[0] < 1 or self.m_values[-1] > V:
            raise MOutOfRange(f"m grid must lie in [1, {V}]")

    @property
    def shape(self):
        return len(self.s_values), len(self.m_values)


@dataclass(eq=False)
class EvaluationReport:
    error: float
    predictions: np.ndarray
    truth: np.ndarray
    margins: np.ndarray
    s: int
    m: int | None
    stat: str
    scheme: dict
    grid: HyperGrid | None = None
    errors: np.ndarray | None = None
    fold_errors: np.ndarray | None = None
    missed_edge_rate: float | None = None
    model: FittedModel | None = None
    extra: dict = field(default_factory=dict)

    @property
    def losses(self) -> np.ndarray:
        return (self.predictions != self.truth).astype(np.int8)


# estimator plumbing ---------------------------------------------------------

def _normalize_m(m, V):
    if m is None or int(m) >= V:
        return None
    return int(m)


def estimate_subgraph(T, s, m=None, tie_seed=None) -> SignalSubgraph:
    """Incoherent estimate when ``m`` is ``None`` or ``V``, coherent otherwise."""
    m = _normalize_m(m, T.V)
    if m is None:
        return incoherent_estimate(T, s, tie_seed)
    return coherent_estimate(T, s, m, tie_seed)


def fit_classifier(ds: LabeledDataset, stat="fisher", s=None, m=None,
                   eta_mode="total", tie_seed=None) -> FittedModel:
    """Significance matrix, subgraph estimate and plug-in fit in one call.

    ``s=None`` uses the whole edge set (naive Bayes).
    """
    kind = TestStatisticKind.parse(stat)
    if s is None:
        sg = SignalSubgraph.complete(ds.V)
    else:
        T = significance_matrix(ds, kind)
        sg = estimate_subgraph(T, s, m, tie_seed)
    return fit(ds, sg, eta_mode, kind.value)


def _edge_weights(train: LabeledDataset, eta_mode):
    """Log-likelihood-ratio weights for every edge, as :class:`FittedModel` uses."""
    n0, n1 = train.n0, train.n1
    k0, k1 = train.class_counts()
    r0 = _clamped_rates(k0, n0, smoothing_constant(train.n if eta_mode == "total" else n0))
    r1 = _clamped_rates(k1, n1, smoothing_constant(train.n if eta_mode == "total" else n1))
    present = np.log(r1) - np.log(r0)
    absent = np.log1p(-r1) - np.log1p(-r0)
    prior = np.log(n1 / train.n) - np.log(n0 / train.n)
    return present, absent, prior


def _point_indices(T, s, m, order):
    V = T.V
    if m is None:
        return np.sort(order[:s])
    if s > coherent_capacity(V, m):
        return None
    return coherent_estimate(T, s, m).indices


def _fold_margins(train, test_X, kind, points, eta_mode):
    """Margins of every test row for each ``(s, m)`` point; ``None`` if infeasible."""
    if train.n0 == 0 or train.n1 == 0:
        raise DegenerateFold(f"training split has class sizes ({train.n0}, {train.n1})")
    present, absent, prior = _edge_weights(train, eta_mode)
    delta = np.where(test_X.astype(bool), present, absent)
    T = significance_matrix(train, kind) if any(s is not None for s, _ in points) else None
    order = edge_order(T) if T is not None else None
    out = []
    for s, m in points:
        if s is None:
            idx = np.arange(train.d)
        else:
            idx = _point_indices(T, s, m, order)
        out.append(None if idx is None else delta[:, idx].sum(axis=1) + prior)
    return out


def _evaluate_points(ds, scheme, kind, points, eta_mode):
    """Per-point (error, predictions, margins, fold errors) under ``scheme``."""
    if scheme.kind == "heldout":
        test = scheme.test
        if test.V != ds.V:
            raise DataError(f"test set has V={test.V}, training V={ds.V}")
        splits = [(ds, test.X, test.y, np.arange(test.n))]
        n_eval = test.n
        truth = test.y.copy()
    else:
        splits = []
        all_idx = np.arange(ds.n)
        for f in scheme.partition(ds.n):
            keep = np.setdiff1d(all_idx, f, assume_unique=True)
            splits.append((ds.subset(keep), ds.X[f], ds.y[f], f))
        n_eval = ds.n
        truth = ds.y.copy()

    k = len(points)
    margins = np.full((k, n_eval), np.nan)
    fold_err = np.full((k, len(splits)), np.nan)
    feasible = np.ones(k, dtype=bool)
    for j, (train, test_X, test_y, pos) in enumerate(splits):
        fm = _fold_margins(train, test_X, kind, points, eta_mode)
        for i, mg in enumerate(fm):
            if mg is None:
                feasible[i] = False
                continue
            margins[i, pos] = mg
            fold_err[i, j] = np.mean((mg > 0).astype(np.int8) != test_y)
    results = []
    for i in range(k):
        if not feasible[i]:
            results.append(None)
            continue
        preds = (margins[i] > 0).astype(np.int8)
        # average within each fold, then across folds
        results.append((float(np.mean(fold_err[i])), preds, margins[i], fold_err[i]))
    return results, truth


def cross_validated_error(ds: LabeledDataset, scheme: CvScheme, stat="fisher",
                          s: int | None = None, m: int | None = None,
                          eta_mode: str = "total",
                          truth: SignalSubgraph | None = None) -> EvaluationReport:
    """Cross-validated 0-1 error of the plug-in classifier at fixed ``(s, m)``.

    Every fold re-estimates the significance matrix, subgraph and parameters
    from its training split alone. ``s=None`` evaluates naive Bayes.
    """
    kind = TestStatisticKind.parse(stat)
    m = _normalize_m(m, ds.V)
    if s is not None:
        d = n_edges(ds.V)
        if not 1 <= int(s) <= d:
            raise SOutOfRange(f"s={s} outside [1, {d}]")
        if m is not None and int(s) > coherent_capacity(ds.V, m):
            raise Infeasible(f"s={s} exceeds capacity of m={m} vertices")
        s = int(s)
    results, y = _evaluate_points(ds, scheme, kind, [(s, m)], eta_mode)
    err, preds, margins, fold_err = results[0]
    report = EvaluationReport(err, preds, y, margins, s if s is not None else n_edges(ds.V),
                              m, kind.value, scheme.describe(), fold_errors=fold_err)
    if truth is not None:
        est = fit_classifier(ds, kind, s, m, eta_mode).subgraph
        report.missed_edge_rate = missed_edge_rate(truth, est)
    return report


def hyperparameter_search(ds: LabeledDataset, scheme: CvScheme, stat, grid: HyperGrid,
                          eta_mode: str = "total",
                          truth: SignalSubgraph | None = None) -> EvaluationReport:
    """Evaluate every grid point and refit at the best one.

    Infeasible ``(s, m)`` pairs (``s`` beyond what ``m`` vertices can cover)
    get a NaN error and are skipped. Ties in error go to smaller ``s``, then
    smaller ``m``. The final model is refit on all of ``ds``.
    """
    kind = TestStatisticKind.parse(stat)
    grid.validate(ds.V)
    points = [(s, _normalize_m(m, ds.V)) for s in grid.s_values for m in grid.m_values]
    results, y = _evaluate_points(ds, scheme, kind, points, eta_mode)
    errors = np.full(grid.shape, np.nan)
    best = None
    for flat, res in enumerate(results):
        if res is None:
            continue
        i, j = divmod(flat, grid.shape[1])
        errors[i, j] = res[0]
        if best is None or res[0] < results[best][0]:
            best = flat
    if best is None:
        raise HyperParameterError("no feasible (s, m) pair in the grid")
    i, j = divmod(best, grid.shape[1])
    s_hat, m_hat = grid.s_values[i], grid.m_values[j]
    err, preds, margins, fold_err = results[best]
    model = fit_classifier(ds, kind, s_hat, m_hat, eta_mode)
    report = EvaluationReport(err, preds, y, margins, s_hat, m_hat, kind.value,
                              scheme.describe(), grid=grid, errors=errors,
                              fold_errors=fold_err, model=model)
    if truth is not None:
        report.missed_edge_rate = missed_edge_rate(truth, model.subgraph)
    return report


# naive Bayes fast path ------------------------------------------------------

def _nb_weights(k, n_c, eta):
    """Clamped rates as ``(log r, log(1 - r))`` for counts ``k`` out of ``n_c``."""
    r = _clamped_rates(k, n_c, eta)
    return np.log(r), np.log1p(-r)


def naive_bayes_cv_margins(ds: LabeledDataset, scheme: CvScheme,
                           eta_mode: str = "total") -> np.ndarray:
    """Cross-validated naive Bayes margins for every sample without refitting.

    Each margin is written as ``sum(absent) + x . (present - absent)``, so a
    fold costs one matrix product. Under leave-one-out the held-out graph's
    own class has just two possible training counts per edge (total minus 0
    or minus 1), which removes the per-sample refit entirely. Agrees with
    ``cross_validated_error(..., s=None)`` up to float summation order.
    """
    folds = scheme.partition(ds.n)
    X = ds.X.astype(np.float64)
    y = ds.y
    n = ds.n
    K = np.vstack(ds.class_counts()).astype(np.float64)
    sizes = np.array([ds.n0, ds.n1])
    out = np.empty(n)

    def eta_for(n_train, n_c):
        return smoothing_constant(n_train if eta_mode == "total" else n_c)

    if all(len(f) == 1 for f in folds):
        n_train = n - 1
        for c in (0, 1):
            rows = np.flatnonzero(y == c)
            if rows.size == 0:
                continue
            own = sizes[c] - 1
            other = sizes[1 - c]
            if own == 0 or other == 0:
                raise DegenerateFold("a training split has an empty class")
            # a held-out 1 (0) leaves k - 1 (k) in its class; clip the counts
            # that no held-out sample can produce so the logs stay finite
            lp_1, _ = _nb_weights(np.maximum(K[c] - 1, 0), own, eta_for(n_train, own))
            _, lq_0 = _nb_weights(np.minimum(K[c], own), own, eta_for(n_train, own))
            lp_x, lq_x = _nb_weights(K[1 - c], other, eta_for(n_train, other))
            sign = 1.0 if c == 1 else -1.0
            present = sign * (lp_1 - lp_x)
            absent = sign * (lq_0 - lq_x)
            n_c = np.empty(2)
            n_c[c], n_c[1 - c] = own, other
            prior = np.log(n_c[1] / n_train) - np.log(n_c[0] / n_train)
            out[rows] = absent.sum() + X[rows] @ (present - absent) + prior
        return out

    for f in folds:
        train = np.ones(n, dtype=bool)
        train[f] = False
        n_c = np.array([np.count_nonzero(train & (y == 0)),
                        np.count_nonzero(train & (y == 1))])
        if np.any(n_c == 0):
            raise DegenerateFold("a training split has an empty class")
        k0 = X[train & (y == 0)].sum(axis=0)
        k1 = X[train & (y == 1)].sum(axis=0)
        n_train = int(n_c.sum())
        lp0, lq0 = _nb_weights(k0, n_c[0], eta_for(n_train, n_c[0]))
        lp1, lq1 = _nb_weights(k1, n_c[1], eta_for(n_train, n_c[1]))
        present = lp1 - lp0
        absent = lq1 - lq0
        prior = np.log(n_c[1] / n_train) - np.log(n_c[0] / n_train)
        out[f] = absent.sum() + X[f] @ (present - absent) + prior
    return out


def naive_bayes_cv_error(ds: LabeledDataset, scheme: CvScheme, eta_mode="total") -> float:
    margins = naive_bayes_cv_margins(ds, scheme, eta_mode)
    wrong = ((margins > 0).astype(np.int8) != ds.y).astype(np.float64)
    return float(np.mean([wrong[f].mean() for f in scheme.partition(ds.n)]))


class PermutationResult(NamedTuple):
    pvalue: float
    observed: float
    null_errors: np.ndarray


def _perm_error(args):
    ds, scheme, ss, eta_mode = args
    y = make_rng(ss).permutation(ds.y)
    return naive_bayes_cv_error(ds.relabel(y), scheme, eta_mode)


def permutation_test(ds: LabeledDataset, scheme: CvScheme, n_mc: int = 1000,
                     seed: int = 0, eta_mode: str = "total", jobs: int = 1) -> PermutationResult:
    """Label-permutation test of the naive Bayes cross-validated error.

    ``p = (1 + #{permuted error <= observed}) / (n_mc + 1)``; permutation
    ``i`` shuffles labels with the stream of ``trial_seeds(seed, n_mc)[i]``.
    """
    if scheme.kind == "heldout":
        raise ValueError("permutation test needs a k-fold or leave-one-out scheme")
    if n_mc < 19:
        raise ValueError("n_mc must be at least 19")
    observed = naive_bayes_cv_error(ds, scheme, eta_mode)
    args = [(ds, scheme, ss, eta_mode) for ss in trial_seeds(seed, n_mc)]
    null = np.array(map_jobs(_perm_error, args, jobs))
    p = (1 + int(np.count_nonzero(null <= observed))) / (n_mc + 1)
    return PermutationResult(p, observed, null)


def permutation_test_pvalue(ds, scheme, n_mc=1000, seed=0, eta_mode="total", jobs=1) -> float:
    return permutation_test(ds, scheme, n_mc, seed, eta_mode, jobs).pvalue


# paired comparison ----------------------------------------------------------

def mcnemar_counts(preds_a, preds_b, truth) -> tuple[int, int]:
    a = np.asarray(preds_a)
    b = np.asarray(preds_b)
    t = np.asarray(truth)
    if not (a.shape == b.shape == t.shape):
        raise LengthMismatch(f"lengths differ: {a.shape}, {b.shape}, {t.shape}")
    ra = a == t
    rb = b == t
    return int(np.count_nonzero(ra & ~rb)), int(np.count_nonzero(~ra & rb))


def mcnemar_pvalue(preds_a, preds_b, truth) -> float:
    """Exact two-sided McNemar test on the discordant pairs."""
    b, c = mcnemar_counts(preds_a, preds_b, truth)
    n = b + c
    if n == 0:
        return 1.0
    tail = sum(math.comb(n, i) for i in range(min(b, c) + 1))
    return min(1.0, 2 * tail / 2**n)


# Bayes error ----------------------------------------------------------------

class MonteCarloEstimate(NamedTuple):
    mean: float
    se: float


def bayes_error_mc(spec: HomogeneousModelSpec, n_mc: int = 10000,
                   seed: int | None = None) -> MonteCarloEstimate:
    """Error of the classifier that knows the true parameters, by simulation."""
    ds, _ = sample_homogeneous(spec, n_mc, mode="prior",
                               seed=spec.seed if seed is None else seed)
    model = true_model(spec)
    wrong = (model.predict(ds.X) != ds.y).astype(np.float64)
    return MonteCarloEstimate(float(wrong.mean()), float(wrong.std(ddof=1) / math.sqrt(n_mc)))


# estimator quality ----------------------------------------------------------

def missed_edge_rate(truth: SignalSubgraph, est: SignalSubgraph) -> float:
    if truth.V != est.V:
        raise DataError(f"vertex counts differ: {truth.V} vs {est.V}")
    if len(truth) == 0:
        raise EmptyTruth("true signal-subgraph is empty")
    missed = np.setdiff1d(truth.indices, est.indices).size
    return missed / len(truth)


def relative_rate(r_inc: float, r_coh: float) -> float:
    """``(1 - r_inc) / (1 - r_coh)``; above 1 when the incoherent estimator wins."""
    if r_coh >= 1.0:
        raise DivisionDegenerate("coherent missed-edge rate is 1")
    return (1.0 - r_inc) / (1.0 - r_coh)


def monotone_smooth(rates: Sequence[float]) -> np.ndarray:
    """Running minimum, making a missed-edge curve non-increasing in n."""
    return np.minimum.accumulate(np.asarray(rates, dtype=np.float64))


def relative_efficiency(rate_curve_inc, rate_curve_coh, n) -> float:
    """Sample-size ratio ``n'/n`` for the coherent estimator to match the
    incoherent rate at ``n``.

    Curves are ``(n, rate)`` pairs on a common grid. ``n'`` is interpolated
    linearly between grid points; ``inf`` if the coherent curve never gets
    down to the target on the grid.
    """
    inc = sorted((float(a), float(b)) for a, b in rate_curve_inc)
    coh = sorted((float(a), float(b)) for a, b in rate_curve_coh)
    ns = [a for a, _ in inc]
    if ns != [a for a, _ in coh]:
        raise GridMismatch("incoherent and coherent curves use different n grids")
    inc_r = np.array([b for _, b in inc])
    coh_r = np.array([b for _, b in coh])
    target = float(np.interp(n, ns, inc_r))
    hit = np.flatnonzero(coh_r <= target)
    if hit.size == 0:
        return math.inf
    i = int(hit[0])
    if i == 0:
        n_prime = ns[0]
    else:
        r_a, r_b = coh_r[i - 1], coh_r[i]
        frac = (r_a - target) / (r_a - r_b)
        n_prime = ns[i - 1] + frac * (ns[i] - ns[i - 1])
    return n_prime / n


# model checking -------------------------------------------------------------

def edge_correlation_matrix(ds: LabeledDataset, sg: SignalSubgraph) -> np.ndarray:
    """Pearson correlations between the indicator columns of subgraph edges.

    Constant columns have undefined correlation and are reported as 0,
    diagonal included.
    """
    if ds.n < 2:
        raise TooFewSamples("correlation needs at least two samples")
    cols = ds.X[:, sg.indices].astype(np.float64)
    sd = cols.std(axis=0)
    live = sd > 0
    z = np.zeros_like(cols)
    z[:, live] = (cols[:, live] - cols[:, live].mean(axis=0)) / sd[live]
    C = z.T @ z / ds.n
    C = np.clip(C, -1.0, 1.0)
    np.fill_diagonal(C, np.where(live, 1.0, 0.0))
    return C


def offdiagonal(C: np.ndarray) -> np.ndarray:
    iu = np.triu_indices(C.shape[0], k=1)
    return C[iu]
