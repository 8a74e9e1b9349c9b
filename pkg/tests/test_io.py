import json

import numpy as np
import pytest

from sigsub import io
from sigsub.classify import classify
from sigsub.errors import FileFormatError, NotSymmetric
from sigsub.estimation import coherogram
from sigsub.evaluation import CvScheme, HyperGrid, fit_classifier, hyperparameter_search
from sigsub.graph import AdjacencyMatrix
from sigsub.stats import significance_matrix


def test_fmt():
    assert io.fmt(0.1) == "0.1"
    assert io.fmt(float("nan")) == "" and io.fmt(None) == ""
    assert float(io.fmt(1 / 3)) == 1 / 3


def test_dataset_roundtrip(tmp_path, small_ds):
    ds, truth = small_ds
    io.save_dataset(ds, tmp_path / "d", truth)
    back = io.load_dataset(tmp_path / "d")
    np.testing.assert_array_equal(back.X, ds.X)
    np.testing.assert_array_equal(back.y, ds.y)
    again = io.load_dataset(tmp_path / "d" / "manifest.csv")
    np.testing.assert_array_equal(again.X, ds.X)
    assert io.load_subgraph(tmp_path / "d" / "truth.csv") == truth
    np.testing.assert_array_equal(io.read_labels(tmp_path / "d" / "manifest.csv"), ds.y)


def test_bad_files(tmp_path):
    (tmp_path / "g.csv").write_text("0,1\n0,0\n")
    with pytest.raises(NotSymmetric) as exc:
        io.read_graph_csv(tmp_path / "g.csv")
    assert "g.csv" in str(exc.value)
    (tmp_path / "h.csv").write_text("0,x\nx,0\n")
    with pytest.raises(FileFormatError):
        io.read_graph_csv(tmp_path / "h.csv")
    (tmp_path / "m.csv").write_text("path,y\n")
    with pytest.raises(FileFormatError):
        io.load_dataset(tmp_path / "m.csv")
    with pytest.raises(FileFormatError):
        io.load_dataset(tmp_path / "missing")
    (tmp_path / "j.json").write_text("{nope")
    with pytest.raises(FileFormatError):
        io.read_json(tmp_path / "j.json")


def test_subgraph_roundtrip(tmp_path, small_ds):
    ds, _ = small_ds
    sg = fit_classifier(ds, "fisher", 6, 1).subgraph
    io.save_subgraph(sg, tmp_path / "sg.csv")
    assert (tmp_path / "sg.json").exists()
    back = io.load_subgraph(tmp_path / "sg.csv")
    assert back == sg and back.vertices == sg.vertices


def test_significance_roundtrip(tmp_path, small_ds):
    ds, _ = small_ds
    for kind in ("fisher", "mle"):
        T = significance_matrix(ds, kind)
        io.save_significance(T, tmp_path / f"{kind}.csv")
        back = io.load_significance(tmp_path / f"{kind}.csv", ds.V, kind)
        np.testing.assert_array_equal(back.scores, T.scores)
        if T.pvalues is None:
            assert back.pvalues is None
        else:
            np.testing.assert_array_equal(back.pvalues, T.pvalues)


def test_coherogram_csv(tmp_path, small_ds):
    ds, _ = small_ds
    coh = coherogram(significance_matrix(ds))
    io.save_coherogram(coh, tmp_path / "c.csv")
    lines = (tmp_path / "c.csv").read_text().splitlines()
    assert len(lines) == ds.V + 1
    header = lines[0].split(",")
    assert header[0] == "vertex" and len(header) == coh.levels.size + 1
    assert [int(v) for v in lines[1].split(",")[1:]] == coh.w[0].tolist()


def test_model_roundtrip_preserves_decisions(tmp_path, small_ds, rng):
    ds, _ = small_ds
    model = fit_classifier(ds, "fisher", 6, 1)
    io.save_model(model, tmp_path / "model.json")
    back = io.load_model(tmp_path / "model.json")
    np.testing.assert_array_equal(back.lik, model.lik)
    assert back.priors == model.priors and back.subgraph == model.subgraph
    for _ in range(50):
        g = AdjacencyMatrix.from_upper((rng.random(ds.d) < 0.5).astype(np.uint8), ds.V)
        assert classify(back, g) == classify(model, g)
    # classification through files matches the in-process result
    io.write_graph_csv(tmp_path / "probe.csv", ds.graph(3).a)
    g = io.read_graph_csv(tmp_path / "probe.csv")
    assert classify(back, g) == classify(model, ds.graph(3))


def test_malformed_model(tmp_path):
    (tmp_path / "m.json").write_text(json.dumps({"V": 3}))
    with pytest.raises(FileFormatError):
        io.load_model(tmp_path / "m.json")


def test_report_and_surface(tmp_path, small_ds):
    ds, _ = small_ds
    rep = hyperparameter_search(ds, CvScheme.kfold(4, 0), "fisher", HyperGrid((2, 6, 40), (1, 12)))
    io.save_report(rep, tmp_path / "r.json")
    doc = json.loads((tmp_path / "r.json").read_text())
    assert doc["error"] == rep.error and doc["grid"] == {"s": [2, 6, 40], "m": [1, 12]}
    assert doc["errors"][2][0] is None
    np.testing.assert_array_equal(io.read_predictions(tmp_path / "r.json"), rep.predictions)
    io.save_error_surface(rep, tmp_path / "r.csv")
    lines = (tmp_path / "r.csv").read_text().splitlines()
    assert lines[0] == "s,1,12"
    assert lines[3].startswith("40,,")


def test_experiment_spec(tmp_path):
    doc = {"V": 20, "m": 1, "s": 5, "pi": 0.5, "p": 0.1, "q": 0.3, "n": 30,
           "mode": "conditioned", "seed": 4, "trials": 2}
    (tmp_path / "e.json").write_text(json.dumps(doc))
    spec, run = io.load_experiment(tmp_path / "e.json")
    assert (spec.V, spec.s, spec.q) == (20, 5, 0.3)
    assert run == {"n": 30, "mode": "conditioned", "seed": 4, "trials": 2, "n0": None, "n1": None}
    for bad in ({"mode": "other"}, {"colour": 1}, {"trials": 0}):
        (tmp_path / "b.json").write_text(json.dumps(doc | bad))
        with pytest.raises(FileFormatError):
            io.load_experiment(tmp_path / "b.json")
    (tmp_path / "c.json").write_text(json.dumps({k: v for k, v in doc.items() if k != "q"}))
    with pytest.raises(FileFormatError):
        io.load_experiment(tmp_path / "c.json")
