"""Hierarchical classification toolkit for benthic point annotations.

Trains and compares a top-down local-classifier-per-parent-node model
against a flat leaf-level baseline on feature-vector datasets, scores both
with flat and hierarchical F1 metrics, and turns annotations into benthic
cover proportions at any taxonomic level.
"""

__version__ = "0.1.0"

from .cover import (
    AnnotationSet,
    CoverErrorReport,
    CoverReport,
    cover_at_level,
    cover_error,
    load_annotations,
    save_annotations,
)
from .curve import (
    CurveConfig,
    CurvePoint,
    default_train_sizes,
    emit_results,
    read_results,
    run_learning_curve,
)
from .data import (
    Dataset,
    Sample,
    load_dataset,
    save_dataset,
    stratified_split,
    subsample_train,
)
from .metrics import (
    ClassScores,
    FlatReport,
    HierScores,
    MetricsReport,
    evaluate,
    flat_report,
    hier_report,
    severity_histogram,
)
from .mlp import (
    MLP,
    TrainConfig,
    init_mlp,
    load_mlp,
    loss_and_gradient,
    predict_proba,
    save_mlp,
    train_mlp,
)
from .models import (
    FlatLeafClassifier,
    HierarchicalClassifier,
    PredictionPath,
    load_model,
    node_seed,
    save_model,
)
from .synth import SynthSpec, gen_samples, gen_tree, power_law_counts
from .tree import (
    LabelTree,
    TreeNode,
    bundled_tree_path,
    format_tree,
    load_tree,
    parse_tree,
    parse_tree_json,
)

__all__ = [
    "AnnotationSet",
    "ClassScores",
    "CoverErrorReport",
    "CoverReport",
    "CurveConfig",
    "CurvePoint",
    "Dataset",
    "FlatLeafClassifier",
    "FlatReport",
    "HierScores",
    "HierarchicalClassifier",
    "LabelTree",
    "MLP",
    "MetricsReport",
    "PredictionPath",
    "Sample",
    "SynthSpec",
    "TrainConfig",
    "TreeNode",
    "bundled_tree_path",
    "cover_at_level",
    "cover_error",
    "default_train_sizes",
    "emit_results",
    "evaluate",
    "flat_report",
    "format_tree",
    "gen_samples",
    "gen_tree",
    "hier_report",
    "init_mlp",
    "load_annotations",
    "load_dataset",
    "load_mlp",
    "load_model",
    "load_tree",
    "loss_and_gradient",
    "node_seed",
    "parse_tree",
    "parse_tree_json",
    "power_law_counts",
    "predict_proba",
    "read_results",
    "run_learning_curve",
    "save_annotations",
    "save_dataset",
    "save_mlp",
    "save_model",
    "severity_histogram",
    "stratified_split",
    "subsample_train",
    "train_mlp",
]
