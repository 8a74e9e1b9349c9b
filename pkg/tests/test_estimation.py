import numpy as np
import pytest

from sigsub.errors import Infeasible, MOutOfRange, SOutOfRange
from sigsub.estimation import (
    coherent_capacity,
    coherent_estimate,
    coherogram,
    edge_order,
    incoherent_estimate,
)
from sigsub.evaluation import missed_edge_rate
from sigsub.graph import edge_endpoints, edge_to_index, n_edges
from sigsub.reproduce import missed_edge_curves
from sigsub.simulate import HomogeneousModelSpec, sample_homogeneous
from sigsub.stats import SignificanceMatrix, significance_matrix

M70 = HomogeneousModelSpec(70, 1, 20, 0.5, 0.1, 0.3)


def make_T(V, entries, default=0.0):
    scores = np.full(n_edges(V), default)
    for (u, v), sc in entries.items():
        scores[edge_to_index(u, v, V)] = sc
    return SignificanceMatrix(V, scores)


def brute_incoherent(scores, s):
    # smallest threshold c (scanned over every score) admitting at least s edges
    c = max(x for x in np.unique(scores) if np.sum(scores >= x) >= s)
    above = np.flatnonzero(scores > c)
    at = np.flatnonzero(scores == c)
    return set(above.tolist()) | set(at[: s - above.size].tolist())


def brute_coherent(scores, V, s, m):
    us, vs = edge_endpoints(V)
    for c in sorted(set(scores.tolist()), reverse=True):
        w = [int(np.sum((scores >= c) & ((us == v) | (vs == v)))) for v in range(V)]
        top = sorted(range(V), key=lambda v: (-w[v], v))[:m]
        if sum(w[v] for v in top) >= s:
            inc = [j for j in range(len(scores)) if us[j] in top or vs[j] in top]
            inc.sort(key=lambda j: (-scores[j], j))
            return set(inc[:s]), set(top)
    return None


def test_incoherent_examples():
    T = make_T(3, {(0, 1): 4.6, (0, 2): 0.7, (1, 2): 1.6})
    assert incoherent_estimate(T, 2).edges == ((0, 1), (1, 2))
    assert len(incoherent_estimate(T, 3)) == 3
    assert incoherent_estimate(T, 1).vertices is None


def test_incoherent_matches_threshold_scan(rng):
    for _ in range(200):
        V = int(rng.integers(2, 12))
        d = n_edges(V)
        scores = np.round(rng.exponential(size=d), int(rng.integers(0, 3)))
        s = int(rng.integers(1, d + 1))
        est = incoherent_estimate(SignificanceMatrix(V, scores), s)
        assert set(est.indices.tolist()) == brute_incoherent(scores, s)


def test_incoherent_nested(rng):
    scores = np.round(rng.exponential(size=n_edges(15)), 1)
    T = SignificanceMatrix(15, scores)
    prev = set()
    for s in range(1, n_edges(15) + 1):
        cur = set(incoherent_estimate(T, s).edges)
        assert prev < cur
        prev = cur


def test_star_example():
    T = make_T(4, {(0, 1): 5.0, (1, 2): 4.5, (0, 2): 4.0, (0, 3): 3.0})
    est = coherent_estimate(T, 3, 1)
    assert est.edges == ((0, 1), (0, 2), (0, 3))
    assert est.vertices == (0,)


def test_all_equal_scores_pick_vertex_zero():
    T = SignificanceMatrix(5, np.ones(n_edges(5)))
    est = coherent_estimate(T, 2, 1)
    assert est.vertices == (0,)
    assert est.edges == ((0, 1), (0, 2))


def test_coherent_matches_brute_force(rng):
    for _ in range(150):
        V = int(rng.integers(2, 10))
        d = n_edges(V)
        scores = rng.integers(0, 5, size=d).astype(float)
        m = int(rng.integers(1, V + 1))
        s = int(rng.integers(1, coherent_capacity(V, m) + 1))
        est = coherent_estimate(SignificanceMatrix(V, scores), s, m)
        edges, verts = brute_coherent(scores, V, s, m)
        assert set(est.indices.tolist()) == edges
        assert set(est.vertices) <= verts


def test_coherent_with_all_vertices_is_incoherent(rng):
    for V in (3, 8, 20):
        T = SignificanceMatrix(V, np.round(rng.exponential(size=n_edges(V)), 1))
        for s in (1, n_edges(V) // 2, n_edges(V)):
            assert coherent_estimate(T, s, V).edges == incoherent_estimate(T, s).edges


def test_coherent_feasibility(rng):
    us, vs = edge_endpoints(12)
    for _ in range(50):
        T = SignificanceMatrix(12, rng.exponential(size=n_edges(12)))
        m = int(rng.integers(1, 5))
        s = int(rng.integers(1, coherent_capacity(12, m) + 1))
        est = coherent_estimate(T, s, m)
        assert len(est) == s and len(est.vertices) <= m
        inside = np.isin(us[est.indices], est.vertices) | np.isin(vs[est.indices], est.vertices)
        assert inside.all()


def test_estimator_errors():
    T = SignificanceMatrix(4, np.arange(6.0))
    with pytest.raises(SOutOfRange):
        incoherent_estimate(T, 0)
    with pytest.raises(SOutOfRange):
        incoherent_estimate(T, 7)
    with pytest.raises(MOutOfRange):
        coherent_estimate(T, 2, 5)
    assert coherent_capacity(4, 1) == 3 and coherent_capacity(70, 1) == 69
    with pytest.raises(Infeasible):
        coherent_estimate(T, 4, 1)


def test_tie_seed_shuffles_only_ties():
    T = SignificanceMatrix(6, np.r_[np.full(5, 2.0), np.zeros(10)])
    base = edge_order(T)
    assert base[:5].tolist() == [0, 1, 2, 3, 4]
    orders = {tuple(edge_order(T, tie_seed=k)[:5]) for k in range(20)}
    assert len(orders) > 1
    assert all(set(o) == {0, 1, 2, 3, 4} for o in orders)
    assert np.array_equal(edge_order(T, tie_seed=3), edge_order(T, tie_seed=3))


def test_coherogram_examples():
    coh = coherogram(SignificanceMatrix(5, np.zeros(10)))
    assert coh.levels.tolist() == [0.0]
    assert coh.w[:, 0].tolist() == [4] * 5
    coh = coherogram(make_T(5, {(0, 1): 3.0}))
    assert coh.levels.tolist() == [3.0, 0.0]
    assert coh.w[:, 0].tolist() == [1, 1, 0, 0, 0]
    assert coh.w[:, 1].tolist() == [4] * 5


def test_coherogram_columns_match_definition(rng):
    V = 9
    T = SignificanceMatrix(V, rng.integers(0, 4, size=n_edges(V)).astype(float))
    coh = coherogram(T)
    us, vs = edge_endpoints(V)
    for j, c in enumerate(coh.levels):
        mask = T.scores >= c
        w = np.bincount(us[mask], minlength=V) + np.bincount(vs[mask], minlength=V)
        np.testing.assert_array_equal(coh.w[:, j], w)


def test_coherogram_signal_vertex_dominates():
    hits = 0
    for seed in range(100):
        ds, truth = sample_homogeneous(M70, 1024, "conditioned", seed=seed)
        coh = coherogram(significance_matrix(ds))
        # strictest level whose band holds at least s edges
        j = int(np.argmax(coh.w.sum(axis=0) >= 2 * M70.s))
        hits += int(np.argmax(coh.w[:, j])) == truth.vertices[0]
    assert hits >= 95


def test_missed_edge_rate_decreases_with_n():
    n_grid = (16, 64, 256, 1024)
    mean, se = missed_edge_curves(M70, n_grid, trials=30, seed=17, figure=900)
    for k in range(2):
        for i in range(len(n_grid) - 1):
            tol = 2 * np.hypot(se[i, k], se[i + 1, k])
            assert mean[i + 1, k] <= mean[i, k] + tol
    assert mean[-1].max() < 0.05


def test_robust_to_loose_hyperparameters():
    contained = 0
    for seed in range(30):
        ds, truth = sample_homogeneous(M70, 1024, "conditioned", seed=seed)
        est = coherent_estimate(significance_matrix(ds), 2 * M70.s, 2 * M70.m)
        contained += missed_edge_rate(truth, est) == 0.0
    assert contained / 30 >= 0.9
