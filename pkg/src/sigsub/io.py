"""Reading and writing datasets, subgraphs, models and reports.

JSON holds models and reports; CSV holds matrices and curves. Floats are
written with ``repr`` so every file round-trips exactly and reruns are
byte-identical.
"""
from __future__ import annotations

import csv
import io
import json
import math
import os
import shutil
from pathlib import Path

import numpy as np

from .classify import FittedModel
from .errors import DataError, FileFormatError, GraphError
from .estimation import Coherogram
from .evaluation import EvaluationReport
from .graph import LabeledDataset, SignalSubgraph, edge_endpoints, edges_to_indices, validate_graph
from .simulate import HomogeneousModelSpec
from .stats import SignificanceMatrix, TestStatisticKind

MANIFEST = "manifest.csv"
TRUTH = "truth.csv"


def fmt(x) -> str:
    """Shortest exact text for a float; empty for NaN or ``None``."""
    if x is None:
        return ""
    x = float(x)
    if math.isnan(x):
        return ""
    return repr(x)


def _write_text(path, text: str):
    path = Path(path)
    if path.parent != Path(""):
        path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        fh.write(text)


def _write_csv(path, header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if header is not None:
        w.writerow(header)
    w.writerows(rows)
    _write_text(path, buf.getvalue())


def _read_csv(path) -> list[list[str]]:
    try:
        with open(path, newline="") as fh:
            return [row for row in csv.reader(fh) if row]
    except OSError as exc:
        raise FileFormatError(f"cannot read {path}: {exc.strerror}") from None


def write_json(path, obj):
    _write_text(path, json.dumps(obj, indent=2, allow_nan=False) + "\n")


def read_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise FileFormatError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise FileFormatError(f"{path}: invalid JSON ({exc.msg})") from None


# graphs and datasets --------------------------------------------------------

def write_graph_csv(path, a):
    a = np.asarray(a, dtype=np.uint8)
    _write_text(path, "".join(",".join(map(str, row)) + "\n" for row in a.tolist()))


def read_graph_csv(path):
    rows = _read_csv(path)
    try:
        a = np.array([[int(v) for v in row] for row in rows], dtype=np.int64)
    except ValueError:
        raise FileFormatError(f"{path}: graph entries must be integers") from None
    if a.ndim != 2:
        raise FileFormatError(f"{path}: rows have different lengths")
    try:
        return validate_graph(a)
    except GraphError as exc:
        raise type(exc)(f"{path}: {exc}", exc.index) from None


def _manifest_path(path) -> Path:
    path = Path(path)
    return path / MANIFEST if path.is_dir() else path


def save_dataset(ds: LabeledDataset, out_dir, truth: SignalSubgraph | None = None):
    """Write ``manifest.csv`` plus one CSV per graph under ``out_dir/graphs``."""
    out = Path(out_dir)
    width = max(4, len(str(ds.n - 1)))
    rows = []
    for i in range(ds.n):
        rel = f"graphs/g{i:0{width}d}.csv"
        write_graph_csv(out / rel, ds.graph(i).a)
        rows.append((rel, int(ds.y[i])))
    _write_csv(out / MANIFEST, ("graph_path", "label"), rows)
    if truth is not None:
        save_subgraph(truth, out / TRUTH)


def read_labels(path) -> np.ndarray:
    """The ``label`` column of a manifest-style CSV."""
    rows = _read_csv(path)
    if not rows or "label" not in rows[0]:
        raise FileFormatError(f"{path}: expected a header with a 'label' column")
    col = rows[0].index("label")
    try:
        y = np.array([int(r[col]) for r in rows[1:]], dtype=np.int64)
    except (ValueError, IndexError):
        raise FileFormatError(f"{path}: labels must be 0 or 1") from None
    if np.any((y != 0) & (y != 1)):
        raise FileFormatError(f"{path}: labels must be 0 or 1")
    return y


def load_dataset(path) -> LabeledDataset:
    """Load a dataset from a directory holding ``manifest.csv`` or from the manifest."""
    manifest = _manifest_path(path)
    rows = _read_csv(manifest)
    if not rows or rows[0] != ["graph_path", "label"]:
        raise FileFormatError(f"{manifest}: header must be 'graph_path,label'")
    if len(rows) < 2:
        raise FileFormatError(f"{manifest}: no samples listed")
    base = manifest.parent
    graphs, labels = [], []
    for k, row in enumerate(rows[1:], start=2):
        if len(row) != 2:
            raise FileFormatError(f"{manifest}:{k}: expected 2 fields")
        graphs.append(read_graph_csv(base / row[0]).a)
        try:
            labels.append(int(row[1]))
        except ValueError:
            raise FileFormatError(f"{manifest}:{k}: label {row[1]!r} is not 0/1") from None
    return LabeledDataset.from_graphs(graphs, labels)


# subgraphs ------------------------------------------------------------------

def _sidecar(path) -> Path:
    return Path(path).with_suffix(".json")


def save_subgraph(sg: SignalSubgraph, path):
    """``u,v`` rows plus a JSON sidecar (same stem) with ``V, s, m, vertices``."""
    _write_csv(path, ("u", "v"), sg.edges)
    write_json(_sidecar(path), {
        "V": sg.V,
        "s": sg.s,
        "m": sg.m,
        "vertices": None if sg.vertices is None else list(sg.vertices),
    })


def load_subgraph(path) -> SignalSubgraph:
    meta = read_json(_sidecar(path))
    rows = _read_csv(path)
    if not rows or rows[0] != ["u", "v"]:
        raise FileFormatError(f"{path}: header must be 'u,v'")
    try:
        edges = tuple((int(u), int(v)) for u, v in rows[1:])
        return SignalSubgraph(int(meta["V"]), edges, int(meta["s"]), meta.get("m"),
                              meta.get("vertices"))
    except (KeyError, ValueError, TypeError) as exc:
        raise FileFormatError(f"{path}: malformed subgraph ({exc})") from None


# significance matrices and coherograms -------------------------------------

def save_significance(T: SignificanceMatrix, path):
    us, vs = edge_endpoints(T.V)
    pv = T.pvalues.tolist() if T.pvalues is not None else [None] * len(T.scores)
    rows = ((u, v, fmt(sc), fmt(p)) for u, v, sc, p in
            zip(us.tolist(), vs.tolist(), T.scores.tolist(), pv))
    _write_csv(path, ("u", "v", "score", "pvalue"), rows)


def load_significance(path, V: int, kind=None) -> SignificanceMatrix:
    rows = _read_csv(path)
    if not rows or rows[0] != ["u", "v", "score", "pvalue"]:
        raise FileFormatError(f"{path}: header must be 'u,v,score,pvalue'")
    body = rows[1:]
    idx = edges_to_indices([(int(r[0]), int(r[1])) for r in body], V)
    scores = np.empty(len(body))
    pvals = np.empty(len(body))
    has_p = all(r[3] != "" for r in body)
    scores[idx] = [float(r[2]) for r in body]
    if has_p:
        pvals[idx] = [float(r[3]) for r in body]
    kind = None if kind is None else TestStatisticKind.parse(kind)
    return SignificanceMatrix(V, scores, pvals if has_p else None, kind)


def save_coherogram(coh: Coherogram, path):
    """Vertex rows, one column per significance level (strictest first)."""
    header = ["vertex"] + [fmt(c) for c in coh.levels.tolist()]
    rows = ([v] + row for v, row in enumerate(coh.w.tolist()))
    _write_csv(path, header, rows)


# fitted models --------------------------------------------------------------

def model_to_dict(model: FittedModel) -> dict:
    sg = model.subgraph
    return {
        "V": sg.V,
        "stat": model.stat,
        "n": model.n,
        "eta": model.eta,
        "eta_mode": model.eta_mode,
        "priors": list(model.priors),
        "subgraph": {
            "s": sg.s,
            "m": sg.m,
            "vertices": None if sg.vertices is None else list(sg.vertices),
        },
        "likelihood": {f"{u},{v}": [float(model.lik[0, j]), float(model.lik[1, j])]
                       for j, (u, v) in enumerate(sg.edges)},
    }


def model_from_dict(doc: dict) -> FittedModel:
    try:
        V = int(doc["V"])
        lik = doc["likelihood"]
        edges = [tuple(int(t) for t in key.split(",")) for key in lik]
        sub = doc["subgraph"]
        sg = SignalSubgraph(V, tuple(edges), int(sub["s"]), sub.get("m"), sub.get("vertices"))
        # likelihood rows follow the subgraph's sorted edge order
        table = {tuple(int(t) for t in k.split(",")): v for k, v in lik.items()}
        L = np.array([table[e] for e in sg.edges], dtype=np.float64).T
        return FittedModel(sg, L, tuple(doc["priors"]), int(doc["n"]), float(doc["eta"]),
                           doc.get("stat"), doc.get("eta_mode", "total"))
    except (KeyError, ValueError, TypeError) as exc:
        raise FileFormatError(f"malformed model document ({exc})") from None


def save_model(model: FittedModel, path):
    write_json(path, model_to_dict(model))


def load_model(path) -> FittedModel:
    doc = read_json(path)
    if not isinstance(doc, dict):
        raise FileFormatError(f"{path}: model must be a JSON object")
    return model_from_dict(doc)


# reports --------------------------------------------------------------------

def _nan_to_none(values):
    return [None if v is None or (isinstance(v, float) and math.isnan(v)) else v
            for v in values]


def report_to_dict(report: EvaluationReport) -> dict:
    out = {
        "error": report.error,
        "s": report.s,
        "m": report.m,
        "stat": report.stat,
        "scheme": report.scheme,
        "n": int(report.truth.shape[0]),
        "predictions": report.predictions.astype(int).tolist(),
        "truth": report.truth.astype(int).tolist(),
        "margins": _nan_to_none(report.margins.tolist()),
    }
    if report.fold_errors is not None:
        out["fold_errors"] = _nan_to_none(report.fold_errors.tolist())
    if report.missed_edge_rate is not None:
        out["missed_edge_rate"] = report.missed_edge_rate
    if report.grid is not None:
        out["grid"] = {"s": list(report.grid.s_values), "m": list(report.grid.m_values)}
        out["errors"] = [_nan_to_none(row) for row in report.errors.tolist()]
    if report.model is not None:
        out["model"] = model_to_dict(report.model)
    out.update(report.extra)
    return out


def save_report(report: EvaluationReport, path):
    write_json(path, report_to_dict(report))


def save_error_surface(report: EvaluationReport, path):
    """Error surface CSV: one row per ``s``, one column per ``m``; blank if infeasible."""
    if report.grid is None:
        raise DataError("report has no error surface")
    header = ["s"] + [str(m) for m in report.grid.m_values]
    rows = ([s] + [fmt(e) for e in row]
            for s, row in zip(report.grid.s_values, report.errors.tolist()))
    _write_csv(path, header, rows)


def read_predictions(path) -> np.ndarray:
    """Predictions from a JSON list or an object with a ``predictions`` field."""
    doc = read_json(path)
    if isinstance(doc, dict):
        doc = doc.get("predictions")
    if not isinstance(doc, list):
        raise FileFormatError(f"{path}: expected a list of predictions")
    try:
        return np.array([int(v) for v in doc], dtype=np.int64)
    except (ValueError, TypeError):
        raise FileFormatError(f"{path}: predictions must be integers") from None


def write_rows(path, header, rows):
    """Plain CSV of already formatted rows; floats go through :func:`fmt`."""
    _write_csv(path, header, ([fmt(v) if isinstance(v, float) else v for v in r] for r in rows))


# experiment specs -----------------------------------------------------------

SPEC_KEYS = ("V", "m", "s", "pi", "p", "q", "n", "mode", "seed", "trials")


def load_experiment(path) -> tuple[HomogeneousModelSpec, dict]:
    """Parse ``{V, m, s, pi, p, q, n, mode, seed, trials}``.

    Returns the model spec and the run settings ``n, mode, seed, trials``.
    """
    doc = read_json(path)
    if not isinstance(doc, dict):
        raise FileFormatError(f"{path}: experiment spec must be a JSON object")
    missing = [k for k in ("V", "m", "s", "pi", "p", "q", "n") if k not in doc]
    if missing:
        raise FileFormatError(f"{path}: missing keys {', '.join(missing)}")
    unknown = sorted(set(doc) - set(SPEC_KEYS) - {"placement", "n0", "n1"})
    if unknown:
        raise FileFormatError(f"{path}: unknown keys {', '.join(unknown)}")
    try:
        spec = HomogeneousModelSpec(int(doc["V"]), int(doc["m"]), int(doc["s"]),
                                    float(doc["pi"]), float(doc["p"]), float(doc["q"]),
                                    int(doc.get("seed", 0)),
                                    doc.get("placement", "lexicographic"))
        run = {"n": int(doc["n"]), "mode": doc.get("mode", "prior"),
               "seed": int(doc.get("seed", 0)), "trials": int(doc.get("trials", 1)),
               "n0": doc.get("n0"), "n1": doc.get("n1")}
    except (ValueError, TypeError) as exc:
        raise FileFormatError(f"{path}: bad value ({exc})") from None
    if run["mode"] not in ("prior", "conditioned"):
        raise FileFormatError(f"{path}: mode must be 'prior' or 'conditioned'")
    if run["trials"] < 1:
        raise FileFormatError(f"{path}: trials must be at least 1")
    return spec, run


def remove_quietly(path):
    try:
        if os.path.isdir(path):
            shutil.rmtree(path)
        else:
            os.remove(path)
    except OSError:
        pass
