"""Command-line interface.

Exit codes: 0 success, 2 usage error, 3 data error, 4 infeasible
hyper-parameters. Failures print one JSON object on stderr and leave no
partial outputs behind: every command writes into a staging location that
is moved into place only after it succeeds.
"""
from __future__ import annotations

import argparse
import json
import os
import shutil
import sys
import tempfile
from pathlib import Path

from . import io
from .classify import classify as classify_graph
from .errors import DataError, HyperParameterError
from .estimation import coherogram
from .evaluation import (
    CvScheme,
    HyperGrid,
    cross_validated_error,
    fit_classifier,
    hyperparameter_search,
    mcnemar_counts,
    mcnemar_pvalue,
    permutation_test,
)
from .parallel import JOBS_ENV, default_jobs
from .reproduce import BUDGETS, FIGURES, run_figure, write_tables
from .simulate import sample_homogeneous, trial_seeds
from .stats import significance_matrix

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INFEASIBLE = 0, 2, 3, 4
STATS = ("fisher", "chi2", "mle")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


class Staging:
    """Collects outputs under temporary names and publishes them on commit."""

    def __init__(self):
        self._items = []

    def file(self, final) -> Path:
        final = Path(final)
        final.parent.mkdir(parents=True, exist_ok=True)
        staged = final.parent / f".{final.name}.partial"
        self._items.append((staged, final))
        return staged

    def dir(self, final) -> Path:
        final = Path(final)
        final.parent.mkdir(parents=True, exist_ok=True)
        staged = Path(tempfile.mkdtemp(prefix=f".{final.name}.partial-", dir=final.parent))
        self._items.append((staged, final))
        return staged

    def commit(self):
        for staged, final in self._items:
            if staged.is_dir():
                for src in sorted(staged.rglob("*")):
                    if src.is_file():
                        dst = final / src.relative_to(staged)
                        dst.parent.mkdir(parents=True, exist_ok=True)
                        os.replace(src, dst)
                shutil.rmtree(staged)
            elif staged.exists():
                os.replace(staged, final)
        self._items = []

    def abort(self):
        for staged, _ in self._items:
            io.remove_quietly(staged)
        self._items = []


def _emit(obj):
    print(json.dumps(obj, sort_keys=True))


def _int_list(text: str) -> list[int]:
    """``"5"``, ``"1,2,5"``, ``"1:10"`` or ``"1:100:5"`` (ranges inclusive)."""
    out = []
    try:
        for part in text.split(","):
            part = part.strip()
            if ":" in part:
                bits = [int(b) for b in part.split(":")]
                if len(bits) == 2:
                    bits.append(1)
                if len(bits) != 3 or bits[2] < 1:
                    raise ValueError
                out.extend(range(bits[0], bits[1] + 1, bits[2]))
            else:
                out.append(int(part))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad integer list {text!r}") from None
    if not out:
        raise argparse.ArgumentTypeError(f"empty integer list {text!r}")
    return out


def _positive(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {v}")
    return v


def _scheme(args) -> CvScheme:
    if args.scheme == "loo":
        return CvScheme.loo()
    return CvScheme.kfold(args.folds, seed=args.seed)


# commands -------------------------------------------------------------------

def cmd_simulate(args, stage):
    spec, run = io.load_experiment(args.spec)
    seed = run["seed"] if args.seed is None else args.seed
    out = stage.dir(args.out)
    trials = run["trials"]
    seeds = [seed] if trials == 1 else trial_seeds(seed, trials)
    for t, ss in enumerate(seeds):
        ds, truth = sample_homogeneous(spec, run["n"], run["mode"], run["n0"], run["n1"], seed=ss)
        io.save_dataset(ds, out if trials == 1 else out / f"trial{t:03d}", truth)
    _emit({"out": str(args.out), "trials": trials, "n": run["n"], "V": spec.V})


def cmd_fit(args, stage):
    ds = io.load_dataset(args.data)
    model = fit_classifier(ds, args.stat, args.s, args.m, args.eta_mode)
    io.save_model(model, stage.file(args.out))
    sg = model.subgraph
    _emit({"out": str(args.out), "s": sg.s, "m": sg.m, "n": model.n, "stat": model.stat})


def cmd_classify(args, stage):
    model = io.load_model(args.model)
    g = io.read_graph_csv(args.graph)
    label, margin = classify_graph(model, g.a)
    _emit({"label": label, "margin": margin})


def _summary(rep):
    return {"error": rep.error, "s": rep.s, "m": rep.m, "stat": rep.stat,
            "scheme": rep.scheme, "n": int(rep.truth.shape[0])}


def cmd_xval(args, stage):
    ds = io.load_dataset(args.data)
    rep = cross_validated_error(ds, _scheme(args), args.stat, args.s, args.m, args.eta_mode)
    if args.out:
        io.save_report(rep, stage.file(args.out))
    _emit(_summary(rep))


def cmd_search(args, stage):
    ds = io.load_dataset(args.data)
    m_grid = args.m_grid if args.m_grid is not None else [ds.V]
    grid = HyperGrid(tuple(args.s_grid), tuple(m_grid))
    rep = hyperparameter_search(ds, _scheme(args), args.stat, grid, args.eta_mode)
    io.save_report(rep, stage.file(args.out))
    surface = args.surface or Path(args.out).with_suffix(".csv")
    io.save_error_surface(rep, stage.file(surface))
    _emit(_summary(rep))


def cmd_permtest(args, stage):
    ds = io.load_dataset(args.data)
    res = permutation_test(ds, _scheme(args), args.nmc, args.seed, args.eta_mode, args.jobs)
    _emit({"pvalue": res.pvalue, "observed_error": res.observed, "n_mc": args.nmc,
           "seed": args.seed})


def cmd_compare(args, stage):
    a = io.read_predictions(args.preds_a)
    b = io.read_predictions(args.preds_b)
    t = io.read_labels(args.truth)
    n_ab, n_ba = mcnemar_counts(a, b, t)
    _emit({"pvalue": mcnemar_pvalue(a, b, t), "a_only_correct": n_ab,
           "b_only_correct": n_ba, "n": int(t.shape[0])})


def cmd_coherogram(args, stage):
    ds = io.load_dataset(args.data)
    T = significance_matrix(ds, args.stat)
    coh = coherogram(T)
    io.save_coherogram(coh, stage.file(args.out))
    if args.significance:
        io.save_significance(T, stage.file(args.significance))
    _emit({"out": str(args.out), "V": coh.V, "levels": int(coh.levels.shape[0])})


def cmd_reproduce(args, stage):
    tables = run_figure(args.figure, args.budget, args.seed, args.jobs)
    out = stage.dir(args.out)
    paths = write_tables(tables, out)
    _emit({"figure": args.figure, "budget": args.budget, "seed": args.seed,
           "files": [p.name for p in paths]})


# parser ---------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="sigsub", description="Signal-subgraph graph classification.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, seed_default=0):
        sp.add_argument("--seed", type=int, default=seed_default)
        sp.add_argument("--jobs", type=_positive, default=None,
                        help=f"worker processes (default ${JOBS_ENV} or 1)")

    def data(sp):
        sp.add_argument("--data", required=True, help="dataset directory or manifest CSV")

    def model_flags(sp, need_s=True):
        sp.add_argument("--stat", choices=STATS, default="fisher")
        sp.add_argument("--eta-mode", choices=("total", "class"), default="total")
        if need_s:
            sp.add_argument("--s", type=_positive, required=True)
            sp.add_argument("--m", type=_positive, default=None)

    def scheme(sp):
        sp.add_argument("--scheme", choices=("loo", "kfold"), default="loo")
        sp.add_argument("--folds", type=_positive, default=10)

    sp = sub.add_parser("simulate", help="sample a dataset from an experiment spec")
    sp.add_argument("--spec", required=True)
    sp.add_argument("--out", required=True)
    common(sp, seed_default=None)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("fit", help="estimate a signal-subgraph and fit the classifier")
    data(sp)
    model_flags(sp)
    sp.add_argument("--out", required=True)
    common(sp)
    sp.set_defaults(func=cmd_fit)

    sp = sub.add_parser("classify", help="classify one graph with a fitted model")
    sp.add_argument("--model", required=True)
    sp.add_argument("--graph", required=True)
    common(sp)
    sp.set_defaults(func=cmd_classify)

    sp = sub.add_parser("xval", help="cross-validated error at fixed (s, m)")
    data(sp)
    model_flags(sp)
    scheme(sp)
    sp.add_argument("--out", default=None, help="optional full JSON report")
    common(sp)
    sp.set_defaults(func=cmd_xval)

    sp = sub.add_parser("search", help="cross-validated search over (s, m)")
    data(sp)
    model_flags(sp, need_s=False)
    sp.add_argument("--s-grid", type=_int_list, required=True)
    sp.add_argument("--m-grid", type=_int_list, default=None)
    scheme(sp)
    sp.add_argument("--out", required=True)
    sp.add_argument("--surface", default=None, help="error surface CSV (default: OUT with .csv)")
    common(sp)
    sp.set_defaults(func=cmd_search)

    sp = sub.add_parser("permtest", help="label-permutation test of naive Bayes")
    data(sp)
    sp.add_argument("--nmc", type=_positive, default=1000)
    sp.add_argument("--eta-mode", choices=("total", "class"), default="total")
    scheme(sp)
    common(sp)
    sp.set_defaults(func=cmd_permtest)

    sp = sub.add_parser("compare", help="exact McNemar test of two prediction sets")
    sp.add_argument("--preds-a", required=True)
    sp.add_argument("--preds-b", required=True)
    sp.add_argument("--truth", required=True, help="CSV with a 'label' column")
    common(sp)
    sp.set_defaults(func=cmd_compare)

    sp = sub.add_parser("coherogram", help="vertex by significance-level matrix")
    data(sp)
    sp.add_argument("--stat", choices=STATS, default="fisher")
    sp.add_argument("--out", required=True)
    sp.add_argument("--significance", default=None, help="also write the significance CSV")
    common(sp)
    sp.set_defaults(func=cmd_coherogram)

    sp = sub.add_parser("reproduce", help="figure data at a given budget")
    sp.add_argument("--figure", type=int, choices=FIGURES, required=True)
    sp.add_argument("--budget", choices=BUDGETS, default="desk")
    sp.add_argument("--out", required=True)
    common(sp)
    sp.set_defaults(func=cmd_reproduce)
    return p


def _fail(code, kind, message):
    msg = " ".join(str(message).split())
    print(json.dumps({"error": kind, "exit": code, "message": msg}, sort_keys=True),
          file=sys.stderr)
    return code


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        return _fail(EXIT_USAGE, "UsageError", exc)
    if getattr(args, "jobs", None) is None:
        args.jobs = default_jobs()
    stage = Staging()
    try:
        args.func(args, stage)
        stage.commit()
    except HyperParameterError as exc:
        stage.abort()
        return _fail(EXIT_INFEASIBLE, type(exc).__name__, exc)
    except DataError as exc:
        stage.abort()
        return _fail(EXIT_DATA, type(exc).__name__, exc)
    except (ValueError, UsageError) as exc:
        stage.abort()
        return _fail(EXIT_USAGE, type(exc).__name__, exc)
    except BaseException:
        stage.abort()
        raise
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
