"""Accuracy evaluation, confusion matrices, timing, and grid sweeps.

Query timing covers only the classify call against the fitted model;
whatever produced the feature vectors upstream is deliberately outside the
measured window. Times come from the monotonic clock and are reported as
both arithmetic mean and median.
"""

from __future__ import annotations

import json
import statistics
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import InsufficientData, InvalidData, ParameterError, VocabularyError
from .feature_store import FeatureSet
from .knn import KnnModel, PipelineConfig, Prediction, classify, fit
from .metrics import MetricKind

__all__ = [
    "ConfusionMatrix",
    "EvaluationReport",
    "evaluate",
    "sweep",
    "render_report",
    "render_sweep",
]


@dataclass(frozen=True, eq=False)
class ConfusionMatrix:
    """Counts of (true class, predicted class) pairs; rows are true classes."""

    counts: np.ndarray
    class_names: tuple[str, ...]

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.int64)
        if counts is self.counts:
            counts = counts.copy()
        c = len(self.class_names)
        if counts.shape != (c, c):
            raise InvalidData(f"expected a {c}x{c} matrix, got shape {counts.shape}")
        if np.any(counts < 0):
            raise InvalidData("confusion counts must be non-negative")
        counts.setflags(write=False)
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "class_names", tuple(self.class_names))

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def correct(self) -> int:
        return int(np.trace(self.counts))

    def __eq__(self, other) -> bool:
        if not isinstance(other, ConfusionMatrix):
            return NotImplemented
        return self.class_names == other.class_names and np.array_equal(self.counts, other.counts)


@dataclass(frozen=True)
class EvaluationReport:
    """One evaluated (model, test set, k, metric) combination."""

    accuracy: float
    confusion: ConfusionMatrix
    per_class_accuracy: tuple[float, ...]
    mean_query_seconds: float
    median_query_seconds: float
    k: int
    metric: MetricKind
    config: PipelineConfig
    n_components: int | None


def evaluate(
    model: KnnModel,
    test: FeatureSet,
    k: int,
    metric: MetricKind,
    threads: int = 1,
) -> EvaluationReport:
    """Classify every test vector and aggregate accuracy, confusion and timing.

    The test set must carry the model's class vocabulary in the same order.
    With ``threads`` > 1, queries run on a thread pool; results are reduced
    in test order, so the report is independent of the thread count.
    """
    if test.class_names != model.class_names:
        raise VocabularyError(
            "test-set class vocabulary differs from the model's: "
            f"model={list(model.class_names)}, test={list(test.class_names)}"
        )
    if test.n_vectors < 1:
        raise InsufficientData("test set is empty")
    if threads < 1:
        raise ParameterError(f"threads must be >= 1, got {threads}")

    def timed_classify(row: np.ndarray) -> tuple[Prediction, float]:
        start = time.perf_counter()
        prediction = classify(model, row, k, metric)
        return prediction, time.perf_counter() - start

    rows = list(test.vectors)
    if threads == 1:
        outcomes = [timed_classify(row) for row in rows]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            outcomes = list(pool.map(timed_classify, rows))

    c = len(model.class_names)
    counts = np.zeros((c, c), dtype=np.int64)
    for true_label, (prediction, _) in zip(test.labels, outcomes):
        counts[int(true_label), prediction.predicted_class] += 1
    times = [elapsed for _, elapsed in outcomes]

    confusion = ConfusionMatrix(counts=counts, class_names=model.class_names)
    row_sums = counts.sum(axis=1)
    diag = np.diag(counts)
    per_class = tuple(
        float(diag[r]) / row_sums[r] if row_sums[r] > 0 else 0.0 for r in range(c)
    )
    return EvaluationReport(
        accuracy=confusion.correct / confusion.total,
        confusion=confusion,
        per_class_accuracy=per_class,
        mean_query_seconds=statistics.fmean(times),
        median_query_seconds=statistics.median(times),
        k=k,
        metric=metric,
        config=model.config,
        n_components=model.pca.n_components if model.pca is not None else None,
    )


def sweep(
    train: FeatureSet,
    test: FeatureSet,
    metrics: Sequence[MetricKind] = tuple(MetricKind),
    ks: Sequence[int] = (1, 3, 5, 7, 9),
    pca_options: Sequence[bool] = (True, False),
    variance_threshold: float = 0.99,
    threads: int = 1,
) -> list[EvaluationReport]:
    """Evaluate every (pca option, metric, k) combination on one train/test pair.

    A model is fitted once per PCA option and reused across metrics and k.
    Reports come back ordered by (pca option, metric, k) in the order the
    option lists were given.
    """
    if not metrics or not ks or not pca_options:
        raise ParameterError("metrics, ks and pca_options must be non-empty")
    reports = []
    for use_pca in pca_options:
        config = PipelineConfig(use_pca=use_pca, variance_threshold=variance_threshold)
        model = fit(train, config)
        for metric in metrics:
            for k in ks:
                reports.append(evaluate(model, test, k, metric, threads=threads))
    return reports


def _report_dict(report: EvaluationReport) -> dict:
    return {
        "accuracy": report.accuracy,
        "confusion": report.confusion.counts.tolist(),
        "class_names": list(report.confusion.class_names),
        "per_class_accuracy": list(report.per_class_accuracy),
        "k": report.k,
        "metric": report.metric.value,
        "use_pca": report.config.use_pca,
        "variance_threshold": report.config.variance_threshold,
        "n_components": report.n_components,
        "mean_query_seconds": report.mean_query_seconds,
        "median_query_seconds": report.median_query_seconds,
    }


def _percent(value: float) -> str:
    return f"{value * 100.0:.2f}%"


def render_report(report: EvaluationReport, format: str = "text") -> str:
    """Format a report as aligned text, JSON, or CSV.

    The JSON field names are stable (see the README); CSV holds one row per
    confusion cell plus one summary row.
    """
    if format == "json":
        return json.dumps(_report_dict(report))
    if format == "csv":
        return _render_report_csv(report)
    if format == "text":
        return _render_report_text(report)
    raise ParameterError(f"unknown format {format!r}; expected text, json or csv")


def _render_report_text(report: EvaluationReport) -> str:
    names = report.confusion.class_names
    counts = report.confusion.counts
    pca_desc = (
        f"{report.n_components} components "
        f"(threshold {report.config.variance_threshold:g})"
        if report.config.use_pca
        else "none"
    )
    lines = [
        f"accuracy: {_percent(report.accuracy)} "
        f"({report.confusion.correct}/{report.confusion.total} correct)",
        f"k: {report.k}   metric: {report.metric.value}   pca: {pca_desc}",
        f"query time: mean {report.mean_query_seconds * 1e3:.3f} ms, "
        f"median {report.median_query_seconds * 1e3:.3f} ms",
        "",
        "confusion matrix (rows true, columns predicted):",
    ]
    label_width = max(len(n) for n in names)
    cell_width = max(max(len(n) for n in names), 5) + 2
    header = " " * (label_width + 2) + "".join(n.rjust(cell_width) for n in names)
    lines.append(header + "  class acc".rjust(12))
    for r, name in enumerate(names):
        row = name.rjust(label_width + 2)
        row += "".join(str(int(v)).rjust(cell_width) for v in counts[r])
        row += _percent(report.per_class_accuracy[r]).rjust(12)
        lines.append(row)
    return "\n".join(lines) + "\n"


def _render_report_csv(report: EvaluationReport) -> str:
    names = report.confusion.class_names
    counts = report.confusion.counts
    lines = ["row_type,true_class,predicted_class,count,accuracy,k,metric,use_pca"]
    for r, true_name in enumerate(names):
        for c, pred_name in enumerate(names):
            lines.append(f"cell,{true_name},{pred_name},{int(counts[r, c])},,,,")
    lines.append(
        f"summary,,,{report.confusion.total},{report.accuracy!r},"
        f"{report.k},{report.metric.value},{report.config.use_pca}"
    )
    return "\n".join(lines) + "\n"


def render_sweep(reports: Iterable[EvaluationReport], format: str = "text") -> str:
    """Format a sweep as per-PCA-option metric x k grids, JSON, or CSV.

    In the text grid the best accuracy per metric row is starred.
    """
    reports = list(reports)
    if format == "json":
        return json.dumps([_report_dict(r) for r in reports])
    if format == "csv":
        lines = ["use_pca,metric,k,accuracy,n_components,mean_query_seconds"]
        for r in reports:
            lines.append(
                f"{r.config.use_pca},{r.metric.value},{r.k},{r.accuracy!r},"
                f"{r.n_components if r.n_components is not None else ''},"
                f"{r.mean_query_seconds!r}"
            )
        return "\n".join(lines) + "\n"
    if format != "text":
        raise ParameterError(f"unknown format {format!r}; expected text, json or csv")

    groups: dict[bool, list[EvaluationReport]] = {}
    for r in reports:
        groups.setdefault(r.config.use_pca, []).append(r)
    blocks = []
    for use_pca, group in groups.items():
        ks = sorted({r.k for r in group})
        metric_order = []
        for r in group:
            if r.metric not in metric_order:
                metric_order.append(r.metric)
        cells = {(r.metric, r.k): r.accuracy for r in group}
        pca_reports = [r for r in group if r.n_components is not None]
        title = (
            f"pca: {pca_reports[0].n_components} components" if use_pca and pca_reports
            else "pca: on" if use_pca else "pca: off"
        )
        width = 10
        lines = [f"=== {title} ===", "metric".ljust(12) + "".join(f"k={k}".rjust(width) for k in ks)]
        for metric in metric_order:
            row_vals = [cells.get((metric, k)) for k in ks]
            known = [v for v in row_vals if v is not None]
            best = max(known) if known else None
            row = metric.value.ljust(12)
            for v in row_vals:
                if v is None:
                    row += "-".rjust(width)
                else:
                    mark = "*" if v == best else " "
                    row += (mark + _percent(v)).rjust(width)
            lines.append(row)
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks) + "\n"
