"""Command-line front end: ``weasel-muse <command> ...``.

Commands: fit, predict, evaluate, noise, bench, ablate, dtwi.  All reports
are CSV files with a header row.  Any error prints a message to stderr and
exits non-zero; output files are written to a temporary name first and
renamed only when complete.
"""
from __future__ import annotations

import argparse
import csv
import logging
import os
import sys
import warnings
from contextlib import contextmanager

from .bop import ExtractionConfig
from .dtwi import DtwConfig, dtwi_classify
from .experiments import RunReport, ablation, benchmark, noise_sweep, parse_levels, run_dtwi, run_muse
from .ingest import DatasetFormatError, load_dataset
from .model import LinearParams, ModelFileError, fit, fit_cv, load_model, predict_dataset, save_model
from .sfa import EQUI_DEPTH, EQUI_FREQUENCY

BINNING_FLAGS = {"depth": EQUI_DEPTH, "freq": EQUI_FREQUENCY}


@contextmanager
def _atomic(path):
    tmp = f"{path}.part"
    try:
        yield tmp
        os.replace(tmp, path)
    finally:
        if os.path.exists(tmp):
            os.remove(tmp)


def _write_csv(path, header, rows):
    with _atomic(path) as tmp:
        with open(tmp, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            w.writerows(rows)


def cv_report_path(model_path) -> str:
    """CV table written next to a model: ``<stem>.cv.csv``."""
    stem, _ = os.path.splitext(str(model_path))
    return f"{stem}.cv.csv"


def _add_feature_flags(p, with_grid=True):
    if with_grid:
        p.add_argument("--l", type=int, choices=(2, 4, 6), help="word length (default: CV)")
        p.add_argument("--binning", choices=sorted(BINNING_FLAGS), help="binning (default: CV)")
    p.add_argument("--no-derivatives", action="store_true", help="skip derivative streams")
    p.add_argument("--no-bigrams", action="store_true", help="unigrams only")
    p.add_argument("--univariate", action="store_true", help="drop dimension ids from words")
    p.add_argument("--normalize-windows", action="store_true",
                   help="z-normalize each window and drop the DC term")
    p.add_argument("--window-step", type=int, default=1, metavar="K",
                   help="use every K-th window length")
    p.add_argument("--seed", type=int, default=0, metavar="S")


def _config(args) -> ExtractionConfig:
    return ExtractionConfig(
        use_bigrams=not args.no_bigrams,
        use_derivatives=not args.no_derivatives,
        multivariate_ids=not args.univariate,
        normalize_windows=args.normalize_windows,
        include_dc=not args.normalize_windows,
        window_step=args.window_step,
        seed=args.seed,
    )


def _params(args) -> LinearParams:
    return LinearParams(seed=args.seed)


def _binning(args):
    return None if getattr(args, "binning", None) is None else BINNING_FLAGS[args.binning]


def _name(path) -> str:
    base = os.path.basename(str(path))
    for suffix in ("_TRAIN.csv", "_TEST.csv", ".csv"):
        if base.endswith(suffix):
            return base[: -len(suffix)]
    return base


def _dtw_config(args) -> DtwConfig:
    return DtwConfig(window=args.dtw_window, normalize=not args.dtw_raw)


def _add_dtw_flags(p):
    p.add_argument("--dtw-window", type=float, default=1.0, help="warping band fraction")
    p.add_argument("--dtw-raw", action="store_true", help="skip whole-series normalization")


def cmd_fit(args) -> int:
    train = load_dataset(args.train)
    cfg, params, binning = _config(args), _params(args), _binning(args)
    if args.l is not None and binning is not None:
        model = fit(train, cfg, args.l, binning, params)
    else:
        kw = {}
        if args.l is not None:
            kw["word_lengths"] = (args.l,)
        if binning is not None:
            kw["binnings"] = (binning,)
        model = fit_cv(train, cfg, seed=args.seed, params=params, **kw)
    with _atomic(args.out) as tmp:
        save_model(model, tmp)
    if model.cv_table:
        path = cv_report_path(args.out)
        _write_csv(path, ["l", "binning", "fold", "accuracy"],
                   [[r["l"], r["binning"], r["fold"], r["accuracy"]] for r in model.cv_table])
        print(f"cv report: {path}")
    print(f"model: {args.out} (l={model.word_length}, binning={model.binning}, "
          f"{model.n_features} features)")
    return 0


def cmd_predict(args) -> int:
    model = load_model(args.model)
    test = load_dataset(args.test)
    labels, acc = predict_dataset(model, test)
    rows = [[s.sample_id, p, "" if s.label is None else s.label] for s, p in zip(test, labels)]
    _write_csv(args.out, ["sample_id", "predicted", "label"], rows)
    if acc is not None:
        print(f"accuracy: {acc:.4f}")
    return 0


def cmd_evaluate(args) -> int:
    train, test = load_dataset(args.train), load_dataset(args.test)
    report = RunReport()
    rec, _, _ = run_muse(train, test, _config(args), args.l, _binning(args), _params(args),
                         args.seed, _name(args.train))
    report.add(rec)
    if not args.skip_dtwi:
        report.add(run_dtwi(train, test, _dtw_config(args), _name(args.train))[0])
    with _atomic(args.out) as tmp:
        report.write(tmp)
    for r in report.rows:
        if r.accuracy is not None:
            print(f"{r.method}: accuracy {r.accuracy:.4f}")
    return 0


def cmd_noise(args) -> int:
    train, test = load_dataset(args.train), load_dataset(args.test)
    levels = parse_levels(args.levels)
    rows = noise_sweep(train, test, levels, args.seed, _config(args), _params(args),
                       _dtw_config(args), args.l, _binning(args))
    _write_csv(args.out, ["level", "muse_acc", "dtwi_acc"],
               [[r["level"], r["muse_acc"], r["dtwi_acc"]] for r in rows])
    for r in rows:
        print(f"level {r['level']:.2f}: muse {r['muse_acc']:.4f} dtwi {r['dtwi_acc']:.4f}")
    return 0


def cmd_bench(args) -> int:
    train, test = load_dataset(args.train), load_dataset(args.test)
    res = benchmark(train, test, _config(args), args.l, _binning(args), _params(args),
                    _dtw_config(args), args.seed, _name(args.train))
    _write_csv(args.out, ["dataset", "muse_ms", "dtwi_ms", "ratio", "muse_acc", "dtwi_acc"],
               [[_name(args.train), res["muse_ms"], res["dtwi_ms"], res["ratio"],
                 res["muse"].accuracy, res["dtwi"].accuracy]])
    print(f"muse {res['muse_ms']:.1f} ms, dtwi {res['dtwi_ms']:.1f} ms, ratio {res['ratio']:.2f}")
    return 0


def cmd_ablate(args) -> int:
    train, test = load_dataset(args.train), load_dataset(args.test)
    report = RunReport()
    for arm, rec in ablation(train, test, _config(args), args.l, _binning(args), _params(args),
                             args.seed, _name(args.train)):
        report.add(rec)
        print(f"{arm}: accuracy {rec.accuracy:.4f}")
    with _atomic(args.out) as tmp:
        report.write(tmp)
    return 0


def cmd_dtwi(args) -> int:
    train, test = load_dataset(args.train), load_dataset(args.test)
    labels, acc = dtwi_classify(train, test, _dtw_config(args))
    rows = [[s.sample_id, p, "" if s.label is None else s.label] for s, p in zip(test, labels)]
    _write_csv(args.out, ["sample_id", "predicted", "label"], rows)
    if acc is not None:
        print(f"accuracy: {acc:.4f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="weasel-muse",
                                     description="Multivariate time series classification")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="train a model (cross-validating l and binning)")
    p.add_argument("--train", required=True)
    p.add_argument("--out", required=True, help="model file")
    _add_feature_flags(p)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("predict", help="label a dataset with a saved model")
    p.add_argument("--model", required=True)
    p.add_argument("--test", required=True)
    p.add_argument("--out", required=True, help="prediction CSV")
    p.set_defaults(func=cmd_predict)

    for name, func, help_text in (
        ("evaluate", cmd_evaluate, "fit on train, score MUSE and DTWi on test"),
        ("noise", cmd_noise, "accuracy under increasing Gaussian noise"),
        ("bench", cmd_bench, "CPU prediction time of MUSE vs DTWi"),
        ("ablate", cmd_ablate, "dimension-id / derivative ablation arms"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--train", required=True)
        p.add_argument("--test", required=True)
        p.add_argument("--out", required=True, help="CSV report")
        _add_feature_flags(p)
        _add_dtw_flags(p)
        if name == "noise":
            p.add_argument("--levels", default="0:1:0.1", help="start:stop:step or a,b,c")
        if name == "evaluate":
            p.add_argument("--skip-dtwi", action="store_true")
        p.set_defaults(func=func)

    p = sub.add_parser("dtwi", help="1-NN DTWi predictions")
    p.add_argument("--train", required=True)
    p.add_argument("--test", required=True)
    p.add_argument("--out", required=True, help="prediction CSV")
    _add_dtw_flags(p)
    p.set_defaults(func=cmd_dtwi)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if not args.verbose:
        warnings.simplefilter("ignore", RuntimeWarning)
    try:
        return args.func(args)
    except (DatasetFormatError, ModelFileError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
