"""Feature-space k-NN classification engine.

Min-max normalization, variance-thresholded PCA, four distance metrics and
majority-vote nearest-neighbor classification over labeled feature vectors,
with binary containers (FSET for feature sets, KNNM for fitted models), an
evaluation harness and a CLI.
"""

from . import errors
from .evaluation import (
    ConfusionMatrix,
    EvaluationReport,
    evaluate,
    render_report,
    render_sweep,
    sweep,
)
from .feature_store import (
    FeatureSet,
    SplitSpec,
    export_csv,
    import_csv,
    read_fset,
    stratified_split,
    write_fset,
)
from .knn import (
    KnnModel,
    Neighbor,
    PipelineConfig,
    Prediction,
    apply_pipeline,
    classify,
    fit,
    neighbors,
    read_model,
    write_model,
)
from .metrics import (
    MetricKind,
    batch_distance,
    canberra,
    city_block,
    cosine,
    distance,
    euclidean,
)
from .preprocess import (
    NormalizationStats,
    PcaTransform,
    apply_minmax,
    apply_pca,
    fit_minmax,
    fit_pca,
)

__version__ = "0.1.0"

__all__ = [
    "errors",
    "FeatureSet",
    "SplitSpec",
    "write_fset",
    "read_fset",
    "import_csv",
    "export_csv",
    "stratified_split",
    "NormalizationStats",
    "PcaTransform",
    "fit_minmax",
    "apply_minmax",
    "fit_pca",
    "apply_pca",
    "MetricKind",
    "euclidean",
    "city_block",
    "canberra",
    "cosine",
    "distance",
    "batch_distance",
    "PipelineConfig",
    "KnnModel",
    "Neighbor",
    "Prediction",
    "fit",
    "apply_pipeline",
    "neighbors",
    "classify",
    "write_model",
    "read_model",
    "ConfusionMatrix",
    "EvaluationReport",
    "evaluate",
    "sweep",
    "render_report",
    "render_sweep",
]
