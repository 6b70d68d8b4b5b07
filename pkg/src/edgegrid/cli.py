"""Command-line entry point: ``edgegrid <subcommand> [options]``.

Stages talk through files: synth -> extract -> select -> train -> predict/evaluate.
Exit codes: 0 success, 2 usage error, 1 runtime error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import fields
from pathlib import Path

from . import pipeline, sweeps
from .config import RunConfig
from .data import generate_synthetic
from .errors import EdgeGridError
from .gridfeat import read_features_csv, write_features_csv
from .metrics import (
    confusion_from_pairs,
    read_predictions_csv,
    write_confusion_csv,
    write_metrics,
    write_predictions_csv,
)
from .select import read_subset, write_subset
from .splits import split
from .svm import KernelParams, grid_search_c, load_model, ovo_train, predict_many, save_model

log = logging.getLogger("edgegrid")

SPLITS = ("train", "test", "all")

# flag name, RunConfig field, type, help
_CONFIG_FLAGS = (
    ("--grid", "grid", int, "interior grid lines per axis g"),
    ("--divisions", "divisions", int, "divisions per grid line d"),
    ("--n-spacing", "n_spacing", int, "sample points per line (default: g)"),
    ("--edge-threshold", "edge_threshold", float, "Canny high threshold t on normalized magnitude"),
    ("--low-ratio", "low_ratio", float, "Canny low threshold as a fraction of t"),
    ("--sigma", "sigma", float, "Gaussian smoothing sigma"),
    ("--window", "window", int, "frames per window W"),
    ("--stride", "stride", int, "window stride (default: W, non-overlapping)"),
    ("--keep-every", "keep_every", int, "keep every k-th source frame"),
    ("--reference", "reference", str, "frame used for static features (first|middle|last)"),
    ("--slack-c", "slack_c", float, "SVM soft-margin penalty C"),
    ("--gamma", "gamma", float, "RBF gamma (default: 1/n_features)"),
    ("--folds", "folds", int, "k for grouped k-fold cross-validation"),
    ("--train-fraction", "train_fraction", float, "fraction of sequences per class used for training"),
    ("--max-stale", "max_stale", int, "best-first search stops after this many non-improving expansions"),
    ("--class-encoding", "class_encoding", str, "CFS class correlation (indicator|codes)"),
    ("--source-fps", "source_fps", float, "frame rate of the raw sequences"),
    ("--seed", "seed", int, "seed for splits, folds and synthetic data"),
)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(2, f"{self.prog}: error: {message}\n")


def _add_config_flags(parser):
    defaults = RunConfig()
    group = parser.add_argument_group("run configuration")
    for flag, name, kind, text in _CONFIG_FLAGS:
        if "default:" not in text:
            text = f"{text} (default: {getattr(defaults, name)})"
        group.add_argument(flag, dest=name, type=kind, default=None, help=text)
    group.add_argument("--jobs", type=int, default=None,
                       help="worker processes for extraction and sweeps (default: available cores)")


def _config(args):
    overrides = {f.name: getattr(args, f.name) for f in fields(RunConfig)
                 if getattr(args, f.name, None) is not None}
    return RunConfig(**overrides)


def _jobs(args):
    return args.jobs if args.jobs is not None else pipeline.default_jobs()


def _select_rows(vectors, which, config):
    """Labelled rows of the grouped split named ``which``."""
    vectors = pipeline.labeled_only(vectors)
    if which == "all" or not vectors:
        return vectors
    _, labels, groups = pipeline.to_arrays(vectors)
    train_idx, test_idx = split(labels, groups, config.train_fraction, config.seed)
    chosen = train_idx if which == "train" else test_idx
    return [vectors[i] for i in chosen]


def _arrays(path, which, config):
    vectors = _select_rows(read_features_csv(path), which, config)
    if not vectors:
        raise EdgeGridError(f"{path}: no labelled rows in split {which!r}")
    return vectors, *pipeline.to_arrays(vectors)


def cmd_synth(args):
    config = _config(args)
    labels = generate_synthetic(args.out, sequences_per_class=args.sequences_per_class,
                                frames=args.frames, dims=(args.size, args.size), seed=config.seed)
    log.info("wrote synthetic corpus to %s (labels %s)", args.out, labels)


def cmd_extract(args):
    config = _config(args)
    if not Path(args.corpus).is_dir():
        raise FileNotFoundError(f"corpus directory {args.corpus} does not exist")
    vectors = pipeline.extract_corpus(args.corpus, config, jobs=_jobs(args),
                                      labels_path=args.labels, dump_dir=args.dump_edges)
    write_features_csv(args.out, vectors)
    log.info("wrote %d feature vectors to %s", len(vectors), args.out)


def cmd_select(args):
    config = _config(args)
    _, X, labels, groups = _arrays(args.features, args.split, config)
    subset = pipeline.select_features(X, labels, groups, config, args.evaluator)
    write_subset(args.out, subset)
    log.info("selected %d of %d features", len(subset), X.shape[1])


def cmd_train(args):
    config = _config(args)
    _, X, labels, groups = _arrays(args.features, args.split, config)
    if args.subset:
        subset = read_subset(args.subset)
    else:
        subset = pipeline.select_features(X, labels, groups, config)
    c = config.slack_c
    if args.search_c:
        c = grid_search_c(X, labels, groups, args.search_c, folds=config.folds, seed=config.seed,
                          gamma=config.gamma, feature_subset=subset)
    model = ovo_train(X, labels, KernelParams(config.gamma, c), feature_subset=subset)
    save_model(model, args.out)
    log.info("trained %d machines (C=%g) -> %s", len(model.machines), c, args.out)


def _predict_rows(model, vectors, X):
    predicted = predict_many(model, model.restrict(X))
    return [(v.sequence_id, v.start_index, v.label, p) for v, p in zip(vectors, predicted)]


def cmd_predict(args):
    config = _config(args)
    model = load_model(args.model)
    vectors = read_features_csv(args.features)
    if args.split != "all":
        vectors = _select_rows(vectors, args.split, config)
    if not vectors:
        raise EdgeGridError(f"{args.features}: no rows to predict")
    X, _, _ = pipeline.to_arrays(vectors)
    write_predictions_csv(args.out, _predict_rows(model, vectors, X))


def cmd_evaluate(args):
    config = _config(args)
    if args.predictions:
        if args.model or args.features:
            raise EdgeGridError("give either --predictions or --model with --features")
        true, predicted, counts = read_predictions_csv(args.predictions)
        cm = confusion_from_pairs(true, predicted, counts)
    else:
        if not (args.model and args.features):
            raise EdgeGridError("evaluate needs --model and --features, or --predictions")
        model = load_model(args.model)
        vectors, X, labels, _ = _arrays(args.features, args.split, config)
        rows = _predict_rows(model, vectors, X)
        cm = confusion_from_pairs(list(labels), [r[3] for r in rows])
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_confusion_csv(out / "confusion.csv", cm)
    write_metrics(out / "metrics.txt", cm)
    print(f"overall_accuracy {cm.accuracy:.6f}")


def cmd_sweep(args):
    config = _config(args)
    if not Path(args.corpus).is_dir():
        raise FileNotFoundError(f"corpus directory {args.corpus} does not exist")
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    labeled = pipeline.corpus_windows(args.corpus, config, args.labels)
    if args.axis in ("edge", "both"):
        result = sweeps.sweep_edge_threshold(labeled, config, args.thresholds, _jobs(args))
        sweeps.write_sweep_csv(out / "sweep_edge.csv", result)
    if args.axis in ("grid", "both"):
        result = sweeps.sweep_grid_size(labeled, config, args.sizes, _jobs(args))
        sweeps.write_sweep_csv(out / "sweep_grid.csv", result)


def build_parser():
    parser = _Parser(prog="edgegrid", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def command(name, func, text):
        p = sub.add_parser(name, help=text, description=text)
        p.set_defaults(func=func)
        _add_config_flags(p)
        return p

    p = command("synth", cmd_synth, "write a labelled synthetic moving-shape corpus")
    p.add_argument("--out", required=True, help="corpus directory to create")
    p.add_argument("--sequences-per-class", type=int, default=10)
    p.add_argument("--frames", type=int, default=24, help="source frames per sequence")
    p.add_argument("--size", type=int, default=64, help="frame width and height in pixels")

    p = command("extract", cmd_extract, "edge maps and grid features for every window of a corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True, help="features CSV to write")
    p.add_argument("--labels", help="labels CSV (default: <corpus>/labels.csv)")
    p.add_argument("--dump-edges", help="also write edge maps as PGM under this directory")

    p = command("select", cmd_select, "best-first feature subset search")
    p.add_argument("--features", required=True)
    p.add_argument("--out", required=True, help="subset file to write")
    p.add_argument("--evaluator", choices=("cfs", "wrapper"), default="cfs")
    p.add_argument("--split", choices=SPLITS, default="train")

    p = command("train", cmd_train, "train the one-vs-one RBF SVM")
    p.add_argument("--features", required=True)
    p.add_argument("--out", required=True, help="model file to write")
    p.add_argument("--subset", help="subset file from 'select' (default: run CFS now)")
    p.add_argument("--search-c", type=float, nargs="+", metavar="C",
                   help="pick C from these candidates by grouped k-fold CV")
    p.add_argument("--split", choices=SPLITS, default="train")

    p = command("predict", cmd_predict, "predict a label for every feature row")
    p.add_argument("--model", required=True)
    p.add_argument("--features", required=True)
    p.add_argument("--out", required=True, help="predictions CSV to write")
    p.add_argument("--split", choices=SPLITS, default="all")

    p = command("evaluate", cmd_evaluate, "confusion matrix and per-class recall")
    p.add_argument("--model")
    p.add_argument("--features")
    p.add_argument("--predictions", help="true,predicted[,count] CSV instead of a model")
    p.add_argument("--out-dir", required=True, help="directory for confusion.csv and metrics.txt")
    p.add_argument("--split", choices=SPLITS, default="test")

    p = command("sweep", cmd_sweep, "edge-threshold and grid-size sweeps")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out-dir", required=True, help="directory for sweep_edge.csv / sweep_grid.csv")
    p.add_argument("--labels")
    p.add_argument("--axis", choices=("edge", "grid", "both"), default="both")
    p.add_argument("--thresholds", type=float, nargs="+", default=list(sweeps.EDGE_THRESHOLDS))
    p.add_argument("--sizes", type=int, nargs="+", default=list(sweeps.GRID_SIZES))
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        _config(args)
    except ValueError as exc:
        # out-of-range settings are a usage error, like a malformed flag
        print(f"edgegrid {args.command}: error: {exc}", file=sys.stderr)
        return 2
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except (EdgeGridError, OSError, ValueError, ArithmeticError) as exc:
        print(f"edgegrid {args.command}: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
