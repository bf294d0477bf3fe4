"""Learning-curve harness: flat vs hierarchical over growing training sets.

The design is paired: at every (train size, repeat) cell both models fit
the byte-identical random subsample and are scored on the same fixed test
set, so per-cell metric differences reflect the models alone.  Cell seeds
derive from the base seed, which makes results independent of execution
order and safe to parallelize; emitted files are byte-stable.
"""

from __future__ import annotations

import csv
import hashlib
import logging
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np
from joblib import Parallel, delayed

from .data import Dataset, subsample_train
from .errors import DatasetOverlapError
from .metrics import evaluate
from .mlp import TrainConfig
from .models import FlatLeafClassifier, HierarchicalClassifier
from .tree import LabelTree

logger = logging.getLogger(__name__)

RESULT_COLUMNS = ["model", "train_size", "metric", "mean", "std", "repeats"]
KNOWN_METRICS = (
    "macro_f1",
    "micro_f1",
    "weighted_f1",
    "h_precision",
    "h_recall",
    "h_f1",
)
MODEL_NAMES = ("flat", "hierarchical")


@dataclass(frozen=True)
class CurveConfig:
    train_sizes: tuple[int, ...]
    repeats: int = 5
    base_seed: int = 0
    train_config: TrainConfig = None
    metrics: tuple[str, ...] = ("macro_f1", "h_f1")
    hidden_sizes: tuple[int, ...] = (200, 100)
    standardize: bool = True

    def __post_init__(self):
        if not self.train_sizes:
            raise ValueError("train_sizes must be non-empty")
        if list(self.train_sizes) != sorted(set(self.train_sizes)):
            raise ValueError("train_sizes must be strictly ascending")
        if any(s < 1 for s in self.train_sizes):
            raise ValueError("train_sizes must be positive")
        if self.repeats < 1:
            raise ValueError("repeats must be >= 1")
        unknown = set(self.metrics) - set(KNOWN_METRICS)
        if unknown:
            raise ValueError(f"unknown metrics: {sorted(unknown)}")
        if self.train_config is None:
            object.__setattr__(self, "train_config", TrainConfig())


@dataclass(frozen=True)
class CurvePoint:
    model: str
    train_size: int
    metric: str
    mean: float
    std: float
    repeats: int


def default_train_sizes(n_train: int, n_points: int = 5, low: int = 250, cap: int = 16000):
    """Log-spaced size grid between ``low`` and min(n_train, cap)."""
    hi = min(n_train, cap)
    lo = min(low, hi)
    grid = np.geomspace(lo, hi, n_points)
    return tuple(sorted(set(int(round(s)) for s in grid)))


def cell_seed(base_seed: int, size: int, repeat: int, role: str) -> int:
    """Deterministic seed for one (size, repeat) cell and role."""
    digest = hashlib.blake2s(
        f"{base_seed}:{size}:{repeat}:{role}".encode(), digest_size=8
    ).digest()
    return int.from_bytes(digest, "big")


def _dataset_digest(data: Dataset) -> str:
    h = hashlib.sha256()
    h.update(data.features.tobytes())
    h.update("\x1f".join(data.labels).encode())
    h.update("\x1f".join(data.image_ids).encode())
    h.update(np.asarray(data.point_ids, dtype=np.int64).tobytes())
    return h.hexdigest()


def _run_cell(tree, train, test, config: CurveConfig, label_set, size, repeat):
    sub = subsample_train(train, size, cell_seed(config.base_seed, size, repeat, "sub"))
    digest = _dataset_digest(sub)
    logger.debug("cell size=%d repeat=%d subsample=%s", size, repeat, digest)

    fit_config = replace(
        config.train_config, seed=cell_seed(config.base_seed, size, repeat, "fit")
    )
    kwargs = dict(
        tree=tree,
        config=fit_config,
        hidden_sizes=config.hidden_sizes,
        standardize=config.standardize,
    )
    scores = {}
    for name, cls in (("flat", FlatLeafClassifier), ("hierarchical", HierarchicalClassifier)):
        model = cls(**kwargs).fit(sub.features, list(sub.labels))
        pred = model.predict(test.features)
        report = evaluate(tree, list(test.labels), list(pred), label_set=label_set)
        scores[name] = {m: getattr(report, m) for m in config.metrics}
    return size, repeat, digest, scores


def run_learning_curve(
    tree: LabelTree,
    train: Dataset,
    test: Dataset,
    config: CurveConfig,
    n_jobs: int = 1,
) -> list[CurvePoint]:
    """Paired learning-curve sweep; returns one point per
    (model, size, metric) with mean and population std over repeats."""
    if config.train_sizes[-1] > len(train):
        raise ValueError(
            f"largest train size {config.train_sizes[-1]} exceeds |train|={len(train)}"
        )
    overlap = set(zip(train.image_ids, train.point_ids)) & set(
        zip(test.image_ids, test.point_ids)
    )
    if overlap:
        raise DatasetOverlapError(
            f"{len(overlap)} (image_id, point_id) keys appear in both train and test"
        )

    observed = set(train.labels) | set(test.labels)
    label_set = [name for name in tree.leaf_names() if name in observed]

    cells = [(s, r) for s in config.train_sizes for r in range(config.repeats)]
    if n_jobs == 1:
        results = [
            _run_cell(tree, train, test, config, label_set, s, r) for s, r in cells
        ]
    else:
        results = Parallel(n_jobs=n_jobs)(
            delayed(_run_cell)(tree, train, test, config, label_set, s, r)
            for s, r in cells
        )

    values: dict[tuple[str, int, str], list[float]] = {}
    for size, repeat, _, scores in results:
        for model in MODEL_NAMES:
            for metric, value in scores[model].items():
                values.setdefault((model, size, metric), []).append(value)

    points = []
    for (model, size, metric) in sorted(values):
        vals = np.asarray(values[(model, size, metric)])
        points.append(
            CurvePoint(
                model=model,
                train_size=size,
                metric=metric,
                mean=float(vals.mean()),
                std=float(vals.std()),  # population std: descriptive error bar
                repeats=len(vals),
            )
        )
    return points


# ---------------------------------------------------------------------------
# results files

def summary_path(path: str | Path) -> Path:
    return Path(path).with_suffix(".summary.txt")


def emit_results(points: list[CurvePoint], path: str | Path) -> None:
    """Write the results table and a human-readable summary next to it.

    Column order is fixed (model,train_size,metric,mean,std,repeats) and
    floats are written with repr, so identical points always produce
    byte-identical files.
    """
    path = Path(path)
    ordered = sorted(points, key=lambda p: (p.model, p.train_size, p.metric))
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(RESULT_COLUMNS)
        for p in ordered:
            writer.writerow(
                [p.model, p.train_size, p.metric, repr(p.mean), repr(p.std), p.repeats]
            )
    summary_path(path).write_text(format_summary(ordered), encoding="utf-8")


def read_results(path: str | Path) -> list[CurvePoint]:
    with Path(path).open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != RESULT_COLUMNS:
            raise ValueError(f"unexpected results header: {header}")
        return [
            CurvePoint(
                model=row[0],
                train_size=int(row[1]),
                metric=row[2],
                mean=float(row[3]),
                std=float(row[4]),
                repeats=int(row[5]),
            )
            for row in reader
        ]


def format_summary(points: list[CurvePoint]) -> str:
    """Fixed-width table of flat vs hierarchical means with the paired gain."""
    by_key = {(p.model, p.train_size, p.metric): p for p in points}
    metrics = sorted({p.metric for p in points})
    sizes = sorted({p.train_size for p in points})
    lines = [
        f"{'metric':<12} {'train_size':>10} {'flat':>17} {'hierarchical':>17} {'gain':>9}"
    ]
    for metric in metrics:
        for size in sizes:
            flat = by_key.get(("flat", size, metric))
            hier = by_key.get(("hierarchical", size, metric))
            if flat is None or hier is None:
                continue
            lines.append(
                f"{metric:<12} {size:>10d} "
                f"{flat.mean:>9.4f}±{flat.std:.4f} "
                f"{hier.mean:>9.4f}±{hier.std:.4f} "
                f"{hier.mean - flat.mean:>+9.4f}"
            )
    return "\n".join(lines) + "\n"
