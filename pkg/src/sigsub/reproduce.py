"""Scaled-down reproductions of the simulation figures as plot-ready CSVs.

Every figure runs at one of two budgets. ``desk`` finishes in a few minutes
on one core; ``full`` uses the original trial counts and grids.

======  ==================================  ==========================  ==========================
figure  experiment                          desk                        full
======  ==================================  ==========================  ==========================
1       log2 subgraph counts vs V           V = 10..100 step 10         V = 2..100
3       M70(1,20;.5,.1,.3) error and        n in {10,20,40,60,100,      same n grid, 100 trials
        missed-edge rate vs n               150,200,300}, 40 trials,
                                            100 test graphs
4       M30(1,5;.5,.1,.2) relative rate     n = 8..2048 (powers of 2),  200 trials
        and efficiency                      100 trials
5       M70(1,20;.5,.1,.3) error surfaces,  s: 1..100 and 30 log steps  s = 1..2415,
        200 train / 500 held-out            to 2415; m in {1,2,3,5,10,  m = 1..70
                                            20,70}
6       synthetic-from-fit: LOO surfaces    8x6 (s, m) grid for LOO;    finer LOO grid,
        at n=49, then error and missed-     n = 10..100 step 10,        100 trials
        edge rate vs n                      10 trials, 100 test graphs
======  ==================================  ==========================  ==========================

Seeds: trial ``t`` at grid position ``i`` of figure ``f`` uses
``SeedSequence(entropy=seed, spawn_key=(f, i, t))``; its training and test
sets use the children ``spawn_key + (0,)`` and ``spawn_key + (1,)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .classify import fit
from .evaluation import (
    CvScheme,
    HyperGrid,
    bayes_error_mc,
    fit_classifier,
    hyperparameter_search,
    missed_edge_rate,
    monotone_smooth,
    relative_efficiency,
    relative_rate,
)
from .graph import n_edges
from .io import write_rows
from .parallel import map_jobs
from .simulate import (
    HomogeneousModelSpec,
    class_sizes,
    pooled_edge_probabilities,
    sample_from_fitted,
    sample_homogeneous,
    subgraph_count_log2,
)
from .estimation import coherent_estimate, incoherent_estimate
from .stats import significance_matrix

FIGURES = (1, 3, 4, 5, 6)
BUDGETS = ("desk", "full")

FIG3_SPEC = HomogeneousModelSpec(70, 1, 20, 0.5, 0.1, 0.3)
FIG4_SPEC = HomogeneousModelSpec(30, 1, 5, 0.5, 0.1, 0.2)
# stand-in for the unavailable 49-subject data: weak, coherent signal
FIG6_SOURCE = HomogeneousModelSpec(70, 12, 360, 25 / 49, 0.2, 0.25)
FIG6_FIT = (360, 12)


def seed_for(seed: int, *key: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(entropy=seed, spawn_key=tuple(int(k) for k in key))


def child(ss: np.random.SeedSequence, k: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(entropy=ss.entropy, spawn_key=ss.spawn_key + (k,))


def mean_se(values) -> tuple[float, float]:
    v = np.asarray(values, dtype=np.float64)
    if v.size < 2:
        return float(v.mean()), math.nan
    return float(v.mean()), float(v.std(ddof=1) / math.sqrt(v.size))


def default_s_grid(d: int, dense: int = 100, log_steps: int = 30) -> tuple[int, ...]:
    """Every ``s`` up to ``dense``, then ``log_steps`` log-spaced values up to ``d``."""
    head = range(1, min(dense, d) + 1)
    tail = np.unique(np.round(np.geomspace(max(dense, 1), d, log_steps)).astype(int))
    return tuple(sorted(set(head) | set(int(t) for t in tail if t <= d)))


# single trials ----------------------------------------------------------------

def _errors_on(model, test):
    return float(np.mean(model.predict(test.X) != test.y))


def classifier_trial(spec: HomogeneousModelSpec, n: int, n_test: int,
                     ss: np.random.SeedSequence, stat: str = "fisher") -> dict:
    """One train/test draw: naive Bayes, incoherent and coherent errors at the
    true ``(s, m)``, plus both missed-edge rates."""
    train, truth = sample_homogeneous(spec, n, "conditioned", seed=child(ss, 0))
    test, _ = sample_homogeneous(spec, n_test, "conditioned", seed=child(ss, 1))
    T = significance_matrix(train, stat)
    inc = incoherent_estimate(T, spec.s)
    coh = coherent_estimate(T, spec.s, spec.m)
    out = {
        "missed_inc": missed_edge_rate(truth, inc),
        "missed_coh": missed_edge_rate(truth, coh),
    }
    out["err_nb"] = _errors_on(fit_classifier(train, stat, None), test)
    out["err_inc"] = _errors_on(fit(train, inc), test)
    out["err_coh"] = _errors_on(fit(train, coh), test)
    return out


def _classifier_trial(args):
    return classifier_trial(*args)


def missed_edge_trial(spec: HomogeneousModelSpec, n: int, ss: np.random.SeedSequence,
                      stat: str = "fisher") -> tuple[float, float]:
    """Missed-edge rates ``(incoherent, coherent)`` at the true ``(s, m)``."""
    train, truth = sample_homogeneous(spec, n, "conditioned", seed=child(ss, 0))
    T = significance_matrix(train, stat)
    return (missed_edge_rate(truth, incoherent_estimate(T, spec.s)),
            missed_edge_rate(truth, coherent_estimate(T, spec.s, spec.m)))


def _missed_edge_trial(args):
    return missed_edge_trial(*args)


@dataclass
class SearchOutcome:
    inc: object
    coh: object


def search_trial(spec: HomogeneousModelSpec, n: int, n_test: int,
                 ss: np.random.SeedSequence, s_grid, m_grid,
                 stat: str = "fisher") -> SearchOutcome:
    """Held-out hyper-parameter searches: ``s`` alone (incoherent) and ``(s, m)``."""
    train, truth = sample_homogeneous(spec, n, "conditioned", seed=child(ss, 0))
    test, _ = sample_homogeneous(spec, n_test, "conditioned", seed=child(ss, 1))
    scheme = CvScheme.heldout(test)
    inc = hyperparameter_search(train, scheme, stat, HyperGrid(s_grid, (spec.V,)), truth=truth)
    coh = hyperparameter_search(train, scheme, stat, HyperGrid(s_grid, m_grid), truth=truth)
    return SearchOutcome(inc, coh)


def _search_summary(args):
    r = search_trial(*args)
    return (r.inc.s, r.inc.error, r.coh.s, r.coh.m, r.coh.error)


def synthetic_model(seed: int = 0, source: HomogeneousModelSpec = FIG6_SOURCE,
                    fit_at=FIG6_FIT, stat: str = "fisher"):
    """Fit the coherent classifier on a 25/24 draw and return it with the
    pooled nuisance probabilities it is regenerated with."""
    src, _ = sample_homogeneous(source, 49, "conditioned", n0=25, n1=24,
                                seed=seed_for(seed, 6, 0, 0))
    model = fit_classifier(src, stat, fit_at[0], fit_at[1])
    return model, pooled_edge_probabilities(src)


def synthetic_trial(model, nuisance, n: int, n_test: int, ss: np.random.SeedSequence,
                    stat: str = "fisher") -> dict:
    """Train on ``n`` synthetic graphs at the fitted ``(s, m)``; score on ``n_test``."""
    pi0 = model.priors[0]
    n0, n1 = class_sizes(n, pi0)
    t0, t1 = class_sizes(n_test, pi0)
    train = sample_from_fitted(model, nuisance, n0, n1, seed=child(ss, 0))
    test = sample_from_fitted(model, nuisance, t0, t1, seed=child(ss, 1))
    truth = model.subgraph
    s, m = truth.s, truth.m
    T = significance_matrix(train, stat)
    inc = incoherent_estimate(T, s)
    coh = coherent_estimate(T, s, m)
    return {
        "missed_inc": missed_edge_rate(truth, inc),
        "missed_coh": missed_edge_rate(truth, coh),
        "err_inc": _errors_on(fit(train, inc), test),
        "err_coh": _errors_on(fit(train, coh), test),
    }


def _synthetic_trial(args):
    return synthetic_trial(*args)


# figures ----------------------------------------------------------------------

def figure1(budget="desk", seed=0, jobs=1):
    Vs = range(10, 101, 10) if budget == "desk" else range(2, 101)
    s_list = list(range(10, 101, 10))
    header = (["V", "unconstrained"] + [f"s={s}" for s in s_list]
              + [f"m=1,s={s}" for s in s_list])
    rows = []
    for V in Vs:
        d = n_edges(V)
        row = [V, float(subgraph_count_log2(V))]
        row += [float(subgraph_count_log2(V, s)) if s <= d else None for s in s_list]
        row += [float(subgraph_count_log2(V, s, 1)) if s <= V - 1 else None for s in s_list]
        rows.append(row)
    # m=1 columns count (vertex, edge set) pairs: an upper bound on distinct subgraphs
    return {"fig1_log2_counts.csv": (header, rows)}


FIG3_N = (10, 20, 40, 60, 100, 150, 200, 300)


def figure3(budget="desk", seed=0, jobs=1, spec=FIG3_SPEC, n_grid=FIG3_N, trials=None,
            n_test=100):
    trials = trials or (40 if budget == "desk" else 100)
    keys = ("missed_inc", "missed_coh", "err_nb", "err_inc", "err_coh")
    args = [(spec, n, n_test, seed_for(seed, 3, i, t))
            for i, n in enumerate(n_grid) for t in range(trials)]
    res = map_jobs(_classifier_trial, args, jobs)
    L = bayes_error_mc(spec, 10000, seed=seed_for(seed, 3, 999, 0))
    header = ["n"] + [f"{k}_{x}" for k in keys for x in ("mean", "se")] + ["L_star", "L_pi"]
    rows = []
    for i, n in enumerate(n_grid):
        chunk = res[i * trials:(i + 1) * trials]
        row = [n]
        for k in keys:
            row += list(mean_se([r[k] for r in chunk]))
        row += [L.mean, min(spec.pi, 1 - spec.pi)]
        rows.append(row)
    return {"fig3_performance.csv": (header, rows)}


FIG4_N = tuple(2 ** k for k in range(3, 12))


def missed_edge_curves(spec, n_grid, trials, seed, jobs=1, figure=4):
    """Mean and SE of both missed-edge rates at each ``n``; shape ``(len(n), 2, 2)``."""
    args = [(spec, n, seed_for(seed, figure, i, t))
            for i, n in enumerate(n_grid) for t in range(trials)]
    res = np.array(map_jobs(_missed_edge_trial, args, jobs)).reshape(len(n_grid), trials, 2)
    mean = res.mean(axis=1)
    se = res.std(axis=1, ddof=1) / math.sqrt(trials)
    return mean, se


def figure4(budget="desk", seed=0, jobs=1, spec=FIG4_SPEC, n_grid=FIG4_N, trials=None):
    trials = trials or (100 if budget == "desk" else 200)
    mean, se = missed_edge_curves(spec, n_grid, trials, seed, jobs)
    inc_s = monotone_smooth(mean[:, 0])
    coh_s = monotone_smooth(mean[:, 1])
    inc_curve = list(zip(n_grid, inc_s))
    coh_curve = list(zip(n_grid, coh_s))
    header = ["n", "missed_inc_mean", "missed_inc_se", "missed_coh_mean", "missed_coh_se",
              "relative_rate", "relative_efficiency"]
    rows = []
    for i, n in enumerate(n_grid):
        rr = relative_rate(mean[i, 0], mean[i, 1]) if mean[i, 1] < 1 else None
        re = relative_efficiency(inc_curve, coh_curve, n)
        rows.append([n, mean[i, 0], se[i, 0], mean[i, 1], se[i, 1], rr,
                     None if math.isinf(re) else re])
    return {"fig4_relative.csv": (header, rows)}


def figure5(budget="desk", seed=0, jobs=1, spec=FIG3_SPEC, n=200, n_test=500):
    d = n_edges(spec.V)
    if budget == "desk":
        s_grid, m_grid = default_s_grid(d), (1, 2, 3, 5, 10, 20, spec.V)
    else:
        s_grid, m_grid = tuple(range(1, d + 1)), tuple(range(1, spec.V + 1))
    out = search_trial(spec, n, n_test, seed_for(seed, 5, 0, 0), s_grid, m_grid)
    inc_rows = [[s, e] for s, e in zip(s_grid, out.inc.errors[:, 0].tolist())]
    coh_header = ["s"] + [str(m) for m in m_grid]
    coh_rows = [[s] + row for s, row in zip(s_grid, out.coh.errors.tolist())]
    summary = [["incoherent", out.inc.s, spec.V, out.inc.error, out.inc.missed_edge_rate],
               ["coherent", out.coh.s, out.coh.m, out.coh.error, out.coh.missed_edge_rate]]
    return {
        "fig5_incoherent.csv": (["s", "error"], inc_rows),
        "fig5_coherent_surface.csv": (coh_header, coh_rows),
        "fig5_best.csv": (["estimator", "s", "m", "error", "missed_edge_rate"], summary),
    }


FIG6_N = tuple(range(10, 101, 10))


def figure6(budget="desk", seed=0, jobs=1, n_grid=FIG6_N, trials=None, n_test=100):
    trials = trials or (10 if budget == "desk" else 100)
    model, nuisance = synthetic_model(seed)
    n0, n1 = 25, 24
    ds = sample_from_fitted(model, nuisance, n0, n1, seed=seed_for(seed, 6, 0, 1))
    d = n_edges(ds.V)
    if budget == "desk":
        s_grid = (10, 20, 50, 100, 200, 360, 600, 1000)
        m_grid = (1, 5, 10, 12, 20, ds.V)
    else:
        s_grid = tuple(sorted(set(range(10, 1001, 10)) | {d}))
        m_grid = tuple(range(1, ds.V + 1, 3)) + (ds.V,)
    grid = HyperGrid(s_grid, m_grid)
    rep = hyperparameter_search(ds, CvScheme.loo(), "fisher", grid)
    surf_header = ["s"] + [str(m) for m in grid.m_values]
    surf_rows = [[s] + row for s, row in zip(grid.s_values, rep.errors.tolist())]

    keys = ("missed_inc", "missed_coh", "err_inc", "err_coh")
    args = [(model, nuisance, n, n_test, seed_for(seed, 6, i + 1, t))
            for i, n in enumerate(n_grid) for t in range(trials)]
    res = map_jobs(_synthetic_trial, args, jobs)
    header = ["n"] + [f"{k}_{x}" for k in keys for x in ("mean", "se")]
    rows = []
    for i, n in enumerate(n_grid):
        chunk = res[i * trials:(i + 1) * trials]
        row = [n]
        for k in keys:
            row += list(mean_se([r[k] for r in chunk]))
        rows.append(row)
    return {
        "fig6_loo_surface.csv": (surf_header, surf_rows),
        "fig6_sweep.csv": (header, rows),
    }


_RUNNERS = {1: figure1, 3: figure3, 4: figure4, 5: figure5, 6: figure6}


def run_figure(figure: int, budget: str = "desk", seed: int = 0, jobs: int = 1) -> dict:
    if figure not in _RUNNERS:
        raise ValueError(f"figure must be one of {FIGURES}")
    if budget not in BUDGETS:
        raise ValueError(f"budget must be one of {BUDGETS}")
    return _RUNNERS[figure](budget=budget, seed=seed, jobs=jobs)


def write_tables(tables: dict, out_dir) -> list[Path]:
    out = Path(out_dir)
    paths = []
    for name in sorted(tables):
        header, rows = tables[name]
        write_rows(out / name, header, rows)
        paths.append(out / name)
    return paths
