"""Command-line front end over FSET feature files and KNNM model files.

Exit codes are a stable scripting contract: 0 success, 2 bad usage or
argument values, 3 file I/O failures, 4 data or format errors. Machine
formats (json, csv) go to standard output only; progress notes go to the
error stream. The only environment variable honored is FEATKNN_COLOR
(set to 1 to highlight best sweep cells with ANSI bold).
"""

from __future__ import annotations

import argparse
import json
import os
import re
import sys

from .errors import FeatknnError, ParameterError, WriteError
from .evaluation import evaluate, render_report, render_sweep, sweep
from .feature_store import (
    FSET_MAGIC,
    FeatureSet,
    SplitSpec,
    read_fset,
    stratified_split,
    write_fset,
)
from .knn import (
    KNNM_MAGIC,
    KnnModel,
    PipelineConfig,
    classify,
    fit,
    read_model,
    write_model,
)
from .metrics import MetricKind

__all__ = ["main"]

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_DATA = 4


def _metric_flag(value: str) -> MetricKind:
    try:
        return MetricKind.parse(value)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _metric_list_flag(value: str) -> list[MetricKind]:
    return [_metric_flag(part) for part in value.split(",") if part.strip()]


def _threshold_flag(value: str) -> float:
    try:
        threshold = float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {value!r}") from None
    if not 0.0 < threshold <= 1.0:
        raise argparse.ArgumentTypeError("threshold must be in (0,1]")
    return threshold


def _positive_int_flag(value: str) -> int:
    try:
        number = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {value!r}") from None
    if number < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {number}")
    return number


def _int_list_flag(value: str) -> list[int]:
    return [_positive_int_flag(part) for part in value.split(",") if part.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="featknn",
        description="Feature-space k-NN classification over FSET/KNNM files.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_fit = sub.add_parser("fit", help="fit a model from a training FSET")
    p_fit.add_argument("train", help="training FSET file")
    p_fit.add_argument("--output", "-o", required=True, help="destination KNNM file")
    p_fit.add_argument("--pca", action=argparse.BooleanOptionalAction, default=True,
                       help="project features with PCA (default: on)")
    p_fit.add_argument("--variance-threshold", type=_threshold_flag, default=0.99,
                       help="cumulative explained-variance target (default: 0.99)")
    p_fit.set_defaults(func=cmd_fit)

    p_predict = sub.add_parser("predict", help="classify query vectors against a model")
    p_predict.add_argument("model", help="KNNM model file")
    p_predict.add_argument("queries", help="FSET file of query vectors")
    p_predict.add_argument("--k", type=_positive_int_flag, default=5)
    p_predict.add_argument("--metric", type=_metric_flag, default=MetricKind.CITY_BLOCK)
    p_predict.add_argument("--format", choices=["text", "json"], default="text")
    p_predict.add_argument("--output", "-o", help="write output here instead of stdout")
    p_predict.set_defaults(func=cmd_predict)

    p_eval = sub.add_parser("evaluate", help="score a model on a labeled test FSET")
    p_eval.add_argument("model", help="KNNM model file")
    p_eval.add_argument("test", help="labeled test FSET file")
    p_eval.add_argument("--k", type=_positive_int_flag, default=5)
    p_eval.add_argument("--metric", type=_metric_flag, default=MetricKind.CITY_BLOCK)
    p_eval.add_argument("--format", choices=["text", "json", "csv"], default="text")
    p_eval.add_argument("--threads", type=_positive_int_flag, default=1)
    p_eval.add_argument("--output", "-o", help="write output here instead of stdout")
    p_eval.set_defaults(func=cmd_evaluate)

    p_sweep = sub.add_parser("sweep", help="evaluate a grid of (pca, metric, k) options")
    p_sweep.add_argument("train", help="training FSET file")
    p_sweep.add_argument("test", help="labeled test FSET file")
    p_sweep.add_argument("--ks", type=_int_list_flag, default=[1, 3, 5, 7, 9],
                         help="comma-separated k values (default: 1,3,5,7,9)")
    p_sweep.add_argument("--metrics", type=_metric_list_flag, default=list(MetricKind),
                         help="comma-separated metric names (default: all four)")
    p_sweep.add_argument("--pca", action=argparse.BooleanOptionalAction, default=None,
                         help="restrict to PCA on (--pca) or off (--no-pca); default: both")
    p_sweep.add_argument("--variance-threshold", type=_threshold_flag, default=0.99)
    p_sweep.add_argument("--format", choices=["text", "json", "csv"], default="text")
    p_sweep.add_argument("--threads", type=_positive_int_flag, default=1)
    p_sweep.add_argument("--output", "-o", help="write output here instead of stdout")
    p_sweep.set_defaults(func=cmd_sweep)

    p_split = sub.add_parser("split", help="stratified split of an FSET into train/test")
    p_split.add_argument("input", help="FSET file to split")
    p_split.add_argument("--per-class-train", type=_positive_int_flag, required=True)
    p_split.add_argument("--per-class-test", type=int, default=0)
    p_split.add_argument("--seed", type=int, default=0)
    p_split.add_argument("--train-output", required=True)
    p_split.add_argument("--test-output", help="required when --per-class-test > 0")
    p_split.set_defaults(func=cmd_split)

    p_inspect = sub.add_parser("inspect", help="summarize an FSET or KNNM file")
    p_inspect.add_argument("path", help="file to inspect")
    p_inspect.set_defaults(func=cmd_inspect)

    return parser


def _read_fset_file(path: str) -> FeatureSet:
    with open(path, "rb") as stream:
        return read_fset(stream)


def _read_model_file(path: str) -> KnnModel:
    with open(path, "rb") as stream:
        return read_model(stream)


def _emit(text: str, output_path: str | None) -> None:
    if output_path:
        with open(output_path, "w", encoding="utf-8") as sink:
            sink.write(text)
    else:
        sys.stdout.write(text)


def cmd_fit(args) -> int:
    train = _read_fset_file(args.train)
    config = PipelineConfig(use_pca=args.pca, variance_threshold=args.variance_threshold)
    model = fit(train, config)
    with open(args.output, "wb") as sink:
        write_model(model, sink)
    lines = [
        f"model written to {args.output}",
        f"database: {model.n} vectors, raw dim {model.raw_dim}",
        f"classes: {', '.join(model.class_names)}",
    ]
    if model.pca is not None:
        cumulative = float(model.pca.explained_variance_ratio.sum())
        lines.append(f"components: {model.pca.n_components} ({cumulative * 100.0:.2f}% variance)")
    else:
        lines.append("pca: none")
    print("\n".join(lines))
    return EXIT_OK


def cmd_predict(args) -> int:
    model = _read_model_file(args.model)
    queries = _read_fset_file(args.queries)
    records = []
    for i in range(queries.n_vectors):
        prediction = classify(model, queries.vectors[i], args.k, args.metric)
        records.append(
            {
                "query": i,
                "predicted_class": model.class_names[prediction.predicted_class],
                "votes": {
                    model.class_names[c]: v
                    for c, v in enumerate(prediction.votes)
                    if v > 0
                },
                "neighbors": [
                    {
                        "index": nb.index,
                        "distance": nb.distance,
                        "label": model.class_names[nb.label],
                    }
                    for nb in prediction.neighbors
                ],
            }
        )
    if args.format == "json":
        _emit(json.dumps(records) + "\n", args.output)
    else:
        lines = []
        for rec in records:
            votes = ",".join(f"{name}:{count}" for name, count in rec["votes"].items())
            triples = " ".join(
                f"({nb['index']}, {nb['distance']:.6g}, {nb['label']})"
                for nb in rec["neighbors"]
            )
            lines.append(
                f"query {rec['query']}: predicted={rec['predicted_class']} "
                f"votes={votes} neighbors={triples}"
            )
        _emit("\n".join(lines) + "\n", args.output)
    return EXIT_OK


def cmd_evaluate(args) -> int:
    model = _read_model_file(args.model)
    test = _read_fset_file(args.test)
    report = evaluate(model, test, args.k, args.metric, threads=args.threads)
    _emit(render_report(report, args.format), args.output)
    return EXIT_OK


def _maybe_color_best_cells(text: str) -> str:
    if os.environ.get("FEATKNN_COLOR") != "1":
        return text
    return re.sub(r"\*(\d+\.\d+%)", "\x1b[1m*\\1\x1b[0m", text)


def cmd_sweep(args) -> int:
    train = _read_fset_file(args.train)
    test = _read_fset_file(args.test)
    pca_options = (True, False) if args.pca is None else (args.pca,)
    reports = sweep(
        train,
        test,
        metrics=args.metrics,
        ks=args.ks,
        pca_options=pca_options,
        variance_threshold=args.variance_threshold,
        threads=args.threads,
    )
    text = render_sweep(reports, args.format)
    if args.format == "text":
        text = _maybe_color_best_cells(text)
    _emit(text, args.output)
    return EXIT_OK


def cmd_split(args) -> int:
    if args.per_class_test < 0:
        raise ParameterError("--per-class-test must be >= 0")
    if args.per_class_test > 0 and not args.test_output:
        raise ParameterError("--test-output is required when --per-class-test > 0")
    full = _read_fset_file(args.input)
    spec = SplitSpec(
        per_class_train=args.per_class_train,
        per_class_test=args.per_class_test,
        seed=args.seed,
    )
    train, test = stratified_split(full, spec)
    with open(args.train_output, "wb") as sink:
        write_fset(train, sink)
    print(f"train: {train.n_vectors} vectors -> {args.train_output}", file=sys.stderr)
    if args.per_class_test > 0:
        with open(args.test_output, "wb") as sink:
            write_fset(test, sink)
        print(f"test: {test.n_vectors} vectors -> {args.test_output}", file=sys.stderr)
    return EXIT_OK


def cmd_inspect(args) -> int:
    with open(args.path, "rb") as stream:
        magic = stream.read(4)
        stream.seek(0)
        if magic == FSET_MAGIC:
            fset = read_fset(stream)
            print(
                f"FSET: {fset.n_vectors} vectors, dim {fset.dim}, "
                f"{fset.n_classes} classes: {', '.join(fset.class_names)}"
            )
            return EXIT_OK
        if magic == KNNM_MAGIC:
            model = read_model(stream)
            print(
                f"KNNM: {model.n} vectors, raw dim {model.raw_dim}, "
                f"{len(model.class_names)} classes: {', '.join(model.class_names)}"
            )
            if model.pca is not None:
                cumulative = float(model.pca.explained_variance_ratio.sum())
                print(
                    f"pca: {model.pca.n_components} components "
                    f"({cumulative * 100.0:.2f}% cumulative variance)"
                )
            else:
                print("pca: none")
            return EXIT_OK
    print("error: unrecognized file format", file=sys.stderr)
    return EXIT_DATA


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return args.func(args)
    except ParameterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except WriteError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except FeatknnError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
