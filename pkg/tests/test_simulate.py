import math
from itertools import combinations

import numpy as np
import pytest

from sigsub.classify import fit
from sigsub.errors import InfeasibleSpec, MissingNuisance, SOutOfRange
from sigsub.estimation import coherent_capacity, incoherent_estimate
from sigsub.evaluation import missed_edge_rate
from sigsub.graph import SignalSubgraph, edge_endpoints, n_edges
from sigsub.simulate import (
    HomogeneousModelSpec,
    _draw_edges,
    class_sizes,
    make_rng,
    planted_subgraph,
    pooled_edge_probabilities,
    sample_from_fitted,
    sample_homogeneous,
    subgraph_count_log2,
    trial_seeds,
)
from sigsub.stats import significance_matrix

M70 = HomogeneousModelSpec(70, 1, 20, 0.5, 0.1, 0.3)


def test_spec_validation():
    for bad in (dict(p=0.0), dict(q=1.0), dict(pi=1.5), dict(m=0), dict(m=71),
                dict(s=70), dict(placement="spiral")):
        kw = dict(V=70, m=1, s=20, pi=0.5, p=0.1, q=0.3) | bad
        with pytest.raises(InfeasibleSpec):
            HomogeneousModelSpec(**kw)
    with pytest.raises(InfeasibleSpec):
        HomogeneousModelSpec(1, 1, 1, 0.5, 0.1, 0.3)
    HomogeneousModelSpec(70, 1, 69, 0.5, 0.1, 0.1)


def test_planted_subgraph_lexicographic():
    truth = planted_subgraph(M70)
    assert truth.edges == tuple((0, v) for v in range(1, 21))
    assert truth.vertices == (0,)
    truth = planted_subgraph(HomogeneousModelSpec(10, 2, 12, 0.5, 0.1, 0.3))
    assert len(truth) == 12 and truth.vertices == (0, 1)


def test_planted_subgraph_random_placement():
    a = planted_subgraph(HomogeneousModelSpec(30, 3, 40, 0.5, 0.1, 0.3, seed=5,
                                              placement="random"))
    b = planted_subgraph(HomogeneousModelSpec(30, 3, 40, 0.5, 0.1, 0.3, seed=5,
                                              placement="random"))
    assert a == b and len(a) == 40 and len(a.vertices) <= 3


def test_seed_determinism():
    a, _ = sample_homogeneous(M70, 50, "prior", seed=9)
    b, _ = sample_homogeneous(M70, 50, "prior", seed=9)
    c, _ = sample_homogeneous(M70, 50, "prior", seed=10)
    assert np.array_equal(a.X, b.X) and np.array_equal(a.y, b.y)
    assert not np.array_equal(a.X, c.X)
    ss = trial_seeds(3, 4)
    assert [s.spawn_key for s in ss] == [(0,), (1,), (2,), (3,)]
    assert make_rng(ss[1]).random() == make_rng(np.random.SeedSequence(3, spawn_key=(1,))).random()


def test_sampling_modes():
    ds, _ = sample_homogeneous(M70, 49, "conditioned", n0=25, seed=1)
    assert (ds.n0, ds.n1) == (25, 24)
    assert ds.y[:25].max() == 0 and ds.y[25:].min() == 1
    assert class_sizes(49, 25 / 49) == (25, 24)
    with pytest.raises(InfeasibleSpec):
        sample_homogeneous(M70, 10, "conditioned", n0=6, n1=6)
    with pytest.raises(InfeasibleSpec):
        sample_homogeneous(M70, 0)
    with pytest.raises(ValueError):
        sample_homogeneous(M70, 10, "bootstrap")
    ds, _ = sample_homogeneous(M70, 4000, "prior", seed=2)
    assert abs(ds.n0 / ds.n - 0.5) < 3 * math.sqrt(0.25 / 4000)


def test_class_zero_edge_density():
    ds, _ = sample_homogeneous(M70, 10000, "conditioned", n0=10000, n1=0, seed=3)
    counts = ds.X.sum(axis=1)
    d = n_edges(70)
    assert abs(counts.mean() - 0.1 * d) < 4 * math.sqrt(0.1 * 0.9 * d / 10000)


def test_planted_edge_frequency():
    ds, truth = sample_homogeneous(M70, 10000, "conditioned", n0=0, n1=10000, seed=4)
    freq = ds.X[:, truth.indices].mean(axis=0)
    np.testing.assert_array_less(np.abs(freq - 0.3), 0.015)


def test_chunked_draws_match_a_single_draw():
    P = np.array([[0.2] * 15, [0.7] * 15])
    y = np.array([0, 1] * 50, dtype=np.int8)
    a = _draw_edges(make_rng(7), P, y, chunk=7)
    b = _draw_edges(make_rng(7), P, y, chunk=1000)
    np.testing.assert_array_equal(a, b)


def test_sample_from_fitted_nuisance_frequency():
    spec = HomogeneousModelSpec(20, 1, 5, 0.5, 0.2, 0.6)
    src, truth = sample_homogeneous(spec, 60, "conditioned", seed=5)
    model = fit(src, truth)
    nuisance = pooled_edge_probabilities(src)
    ds = sample_from_fitted(model, nuisance, 5000, 5000, seed=6)
    assert (ds.n0, ds.n1) == (5000, 5000)
    outside = np.setdiff1d(np.arange(ds.d), truth.indices)
    freq = ds.X[:, outside].mean(axis=0)
    p = nuisance[outside]
    se = np.sqrt(p * (1 - p) / ds.n)
    assert np.all(np.abs(freq - p) <= 4.5 * se + 1e-12)
    for y in (0, 1):
        f = ds.X[ds.y == y][:, truth.indices].mean(axis=0)
        lik = model.lik[y]
        assert np.all(np.abs(f - lik) <= 4.5 * np.sqrt(lik * (1 - lik) / 5000))


def test_sample_from_fitted_requires_nuisance():
    spec = HomogeneousModelSpec(6, 1, 3, 0.5, 0.2, 0.6)
    src, truth = sample_homogeneous(spec, 20, "conditioned", seed=0)
    model = fit(src, truth)
    nuisance = np.full(n_edges(6), np.nan)
    with pytest.raises(MissingNuisance):
        sample_from_fitted(model, nuisance, 3, 3, seed=0)
    with pytest.raises(MissingNuisance):
        sample_from_fitted(model, np.full(4, 0.5), 3, 3, seed=0)
    # a complete subgraph needs no nuisance at all
    full = fit(src, SignalSubgraph.complete(6))
    ds = sample_from_fitted(full, nuisance, 25, 24, seed=1)
    assert (ds.n0, ds.n1) == (25, 24)


def test_subgraph_counts():
    assert subgraph_count_log2(70) == 2415
    assert subgraph_count_log2(3, 1) == pytest.approx(math.log2(3))
    assert subgraph_count_log2(5, 2, 1) == pytest.approx(math.log2(30))
    assert subgraph_count_log2(70, 20) == pytest.approx(math.log2(math.comb(2415, 20)))
    with pytest.raises(SOutOfRange):
        subgraph_count_log2(4, 7)


def test_m1_count_matches_enumeration():
    # (vertex, edge set) pairs with every edge incident to the vertex
    V, s = 6, 3
    us, vs = edge_endpoints(V)
    pairs = 0
    for v in range(V):
        incident = [j for j in range(n_edges(V)) if v in (us[j], vs[j])]
        pairs += sum(1 for _ in combinations(incident, s))
    assert 2 ** subgraph_count_log2(V, s, 1) == pytest.approx(pairs)
    assert coherent_capacity(V, 1) == V - 1


def test_incoherent_recovers_truth_at_large_n():
    rates = []
    for seed in range(50):
        ds, truth = sample_homogeneous(M70, 4096, "conditioned", seed=seed)
        rates.append(missed_edge_rate(truth, incoherent_estimate(significance_matrix(ds), 20)))
    assert 1 - np.mean(rates) >= 0.95
