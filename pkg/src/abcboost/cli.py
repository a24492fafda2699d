"""Command-line interface: train / predict / evaluate / compare / split.

Exit codes: 0 success, 1 runtime failure, 2 usage or validation error.
stdout carries machine-parseable results only; diagnostics go to stderr.
Every command is deterministic given its flags and input files; `train`
and `split` write a JSON manifest (dataset checksums, resolved config)
sufficient to re-run the experiment exactly.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time

import numpy as np

from . import __version__
from .boost import (Algorithm, TrainConfig, predict_class_batch,
                    predict_scores_batch, train)
from .data import Dataset, load_csv, load_libsvm, split_half_indices, write_csv
from .errors import DataError, ModelIOError, TrainingError
from .evaluate import error_count, p_value, write_curve_csv
from .persist import load_model, save_model

ALGO_NAMES = ["mart", "abc-mart", "logitboost", "abc-logitboost", "classic-logitboost"]


class UsageError(Exception):
    pass


def _load_dataset(path, fmt: str, label_column: int = 0,
                  num_classes: int | None = None) -> Dataset:
    if fmt == "libsvm":
        return load_libsvm(path, num_classes)
    return load_csv(path, label_column, num_classes)


def _sha256(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _write_json_atomic(path, obj) -> None:
    tmp = f"{path}.tmp"
    with open(tmp, "w") as fh:
        json.dump(obj, fh, indent=1, sort_keys=True)
        fh.write("\n")
    os.replace(tmp, path)


def _add_common_data_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--format", choices=["csv", "libsvm"], default="csv")
    p.add_argument("--label-column", type=int, default=0,
                   help="label column index for CSV input (default 0)")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="abcboost",
        description="Multi-class tree boosting: mart, abc-mart, (robust) "
                    "logitboost, abc-logitboost, classic logitboost.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train a model")
    p.add_argument("--algo", choices=ALGO_NAMES, required=True)
    p.add_argument("--train", dest="train_path", required=True)
    _add_common_data_flags(p)
    p.add_argument("-J", type=int, default=20, help="terminal nodes per tree")
    p.add_argument("--nu", type=float, default=0.1, help="shrinkage")
    p.add_argument("-M", type=int, required=True, help="boosting iterations")
    p.add_argument("--test", dest="test_path", default=None,
                   help="held-out set monitored each iteration (log only)")
    p.add_argument("--min-leaf", type=int, default=1)
    p.add_argument("--zmax", type=float, default=4.0,
                   help="response clip for classic-logitboost")
    p.add_argument("--loss-stop", type=float, default=1e-10)
    p.add_argument("--num-classes", type=int, default=None,
                   help="declare K when larger than 1 + max observed label")
    p.add_argument("--model", dest="model_path", required=True)
    p.add_argument("--curve", dest="curve_path", default=None,
                   help="write per-iteration CSV: iteration,train_loss,test_errors")
    p.add_argument("--threads", type=int,
                   default=int(os.environ.get("ABCBOOST_THREADS", "1")),
                   help="parallelism cap; any value yields identical output")

    p = sub.add_parser("predict", help="score a dataset with a saved model")
    p.add_argument("--model", dest="model_path", required=True)
    p.add_argument("--data", dest="data_path", required=True)
    _add_common_data_flags(p)
    p.add_argument("--out", dest="out_path", required=True)

    p = sub.add_parser("evaluate", help="misclassification count on a labeled set")
    p.add_argument("--model", dest="model_path", required=True)
    p.add_argument("--data", dest="data_path", required=True)
    _add_common_data_flags(p)

    p = sub.add_parser("compare", help="one-sided two-proportion p-value")
    p.add_argument("--errors", type=int, nargs=2, metavar=("E1", "E2"), required=True)
    p.add_argument("--n", type=int, required=True)

    p = sub.add_parser("split", help="deterministic random halving of a dataset")
    p.add_argument("--data", dest="data_path", required=True)
    _add_common_data_flags(p)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out-a", required=True)
    p.add_argument("--out-b", required=True)
    return parser


def _cmd_train(args) -> int:
    if args.threads < 1:
        raise UsageError("--threads must be >= 1")
    algo = Algorithm.from_cli_name(args.algo)
    train_ds = _load_dataset(args.train_path, args.format, args.label_column,
                             args.num_classes)
    if algo.is_abc and train_ds.num_classes < 3:
        raise UsageError(
            f"{args.algo} requires K >= 3 classes; "
            f"{args.train_path} has K={train_ds.num_classes}")
    monitor = None
    if args.test_path:
        monitor = _load_dataset(args.test_path, args.format, args.label_column,
                                train_ds.num_classes)
    config = TrainConfig(algo, args.J, args.nu, args.M, args.min_leaf,
                         args.zmax, args.loss_stop)
    try:
        config.validate()
    except TrainingError as exc:
        raise UsageError(str(exc)) from exc

    started = time.time()
    model, log = train(config, train_ds, monitor)
    elapsed = time.time() - started
    save_model(model, args.model_path)
    if args.curve_path:
        write_curve_csv(args.curve_path, log)

    final_errors = log.test_errors[-1] if log.test_errors else None
    manifest = {
        "command": "train",
        "algorithm": algo.value,
        "config": {"J": args.J, "nu": args.nu, "M": args.M,
                   "min_leaf": args.min_leaf, "z_max": args.zmax,
                   "loss_stop": args.loss_stop, "threads": args.threads},
        "train": {"path": os.path.abspath(args.train_path),
                  "sha256": _sha256(args.train_path),
                  "n": train_ds.num_samples, "d": train_ds.num_features,
                  "k": train_ds.num_classes},
        "test": None if monitor is None else {
            "path": os.path.abspath(args.test_path),
            "sha256": _sha256(args.test_path),
            "n": monitor.num_samples},
        "iterations_run": len(log.train_loss),
        "final_train_loss": log.train_loss[-1],
        "final_test_errors": final_errors,
        "wall_clock_seconds": elapsed,
    }
    _write_json_atomic(f"{args.model_path}.manifest.json", manifest)

    print(f"iterations {len(log.train_loss)}")
    print(f"final_train_loss {log.train_loss[-1]!r}")
    if final_errors is not None:
        print(f"test_errors {final_errors} of {monitor.num_samples}")
    return 0


def _cmd_predict(args) -> int:
    model = load_model(args.model_path)
    ds = _load_dataset(args.data_path, args.format, args.label_column)
    if ds.num_features != model.num_features:
        raise UsageError(
            f"model expects {model.num_features} features, "
            f"{args.data_path} has {ds.num_features}")
    scores = predict_scores_batch(model, ds.features)
    pred = np.argmax(scores, axis=1)
    with open(args.out_path, "w") as fh:
        cols = ",".join(f"score_{k}" for k in range(model.num_classes))
        fh.write(f"row,predicted_class,{cols}\n")
        for i in range(len(pred)):
            vals = ",".join(repr(float(v)) for v in scores[i])
            fh.write(f"{i},{pred[i]},{vals}\n")
    print(f"predicted {len(pred)} rows")
    return 0


def _cmd_evaluate(args) -> int:
    model = load_model(args.model_path)
    ds = _load_dataset(args.data_path, args.format, args.label_column,
                       model.num_classes)
    if ds.num_features != model.num_features:
        raise UsageError(
            f"model expects {model.num_features} features, "
            f"{args.data_path} has {ds.num_features}")
    report = error_count(model, ds)
    print(f"test_errors {report.error_count} of {report.n_test}")
    print(f"error_rate {report.error_rate!r}")
    return 0


def _cmd_compare(args) -> int:
    e1, e2 = args.errors
    try:
        p = p_value(e1, e2, args.n)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    print("0" if p == 0.0 else f"{p:.6e}")
    return 0


def _cmd_split(args) -> int:
    ds = _load_dataset(args.data_path, args.format, args.label_column)
    idx_a, idx_b = split_half_indices(ds.num_samples, args.seed)
    write_csv(args.out_a, ds.subset(idx_a))
    write_csv(args.out_b, ds.subset(idx_b))
    for out, idx in ((args.out_a, idx_a), (args.out_b, idx_b)):
        with open(f"{out}.indices.txt", "w") as fh:
            fh.writelines(f"{i}\n" for i in idx)
    print(f"wrote {len(idx_a)} rows to {args.out_a}, {len(idx_b)} rows to {args.out_b}")
    return 0


_COMMANDS = {
    "train": _cmd_train,
    "predict": _cmd_predict,
    "evaluate": _cmd_evaluate,
    "compare": _cmd_compare,
    "split": _cmd_split,
}


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (UsageError, DataError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (TrainingError, ModelIOError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
