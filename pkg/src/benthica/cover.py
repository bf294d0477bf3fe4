"""Benthic cover proportions from point annotations, at any tree level.

Each annotated point maps to its category's ancestor at the requested
depth (leaves shallower than the level stay themselves), and relative
frequencies of those categories serve as cover proxies.  Reports carry
both the pooled proportions and per-image proportions; ecologists use the
per-image statistics for survey variance and the pooled ones for totals.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

from .data import Dataset
from .errors import (
    DuplicatePointError,
    EmptyAnnotationSetError,
    KeyMismatchError,
    MalformedRowError,
    UnknownLabelError,
)
from .tree import LabelTree


@dataclass(frozen=True)
class AnnotationSet:
    """Point annotations: (image_id, point_id, leaf name) records.

    ``points_per_image`` is descriptive metadata (the survey design target,
    typically 25), not an enforced count; proportions always use actual
    counts.
    """

    records: tuple[tuple[str, int, str], ...]
    points_per_image: int = 25

    def __post_init__(self):
        seen = set()
        for image_id, point_id, _ in self.records:
            key = (image_id, point_id)
            if key in seen:
                raise DuplicatePointError(
                    f"duplicate annotation for image {image_id!r} point {point_id}"
                )
            seen.add(key)

    def __len__(self) -> int:
        return len(self.records)

    def keys(self) -> set[tuple[str, int]]:
        return {(i, p) for i, p, _ in self.records}

    @classmethod
    def from_dataset(cls, data: Dataset, points_per_image: int = 25) -> "AnnotationSet":
        records = tuple(zip(data.image_ids, data.point_ids, data.labels))
        return cls(records=records, points_per_image=points_per_image)


@dataclass(frozen=True)
class CoverReport:
    level: int
    per_category: dict[str, float] = field(repr=False)
    n_points: int = 0
    per_image: dict[str, dict[str, float]] = field(default_factory=dict, repr=False)


@dataclass(frozen=True)
class CoverErrorReport:
    """Absolute cover-proportion errors between two annotation sets.

    ``per_category`` and ``total_abs_error`` are pooled over all points;
    ``mean_abs_error`` averages the per-image total absolute error over
    images, which is the survey-level summary and is guaranteed not to
    increase when categories are merged into coarser levels.
    """

    level: int
    per_category: dict[str, float] = field(repr=False)
    total_abs_error: float = 0.0
    mean_abs_error: float = 0.0


# ---------------------------------------------------------------------------
# annotation file I/O

_LABEL_COLUMNS = ("label", "predicted_label")


def load_annotations(path: str | Path, tree: LabelTree | None = None) -> AnnotationSet:
    """Read annotations from any tabular file carrying image_id, point_id,
    and a label (or predicted_label) column; extra columns are ignored."""
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise MalformedRowError(f"{path}: file is empty")
        if header[:2] != ["image_id", "point_id"]:
            raise MalformedRowError(f"{path}: header must start with image_id,point_id")
        label_col = None
        for name in _LABEL_COLUMNS:
            if name in header:
                label_col = header.index(name)
                break
        if label_col is None:
            raise MalformedRowError(f"{path}: no label or predicted_label column")
        records = []
        for lineno, row in enumerate(reader, start=2):
            if len(row) <= label_col:
                raise MalformedRowError(f"{path}:{lineno}: missing label field")
            try:
                point = int(row[1])
            except ValueError:
                raise MalformedRowError(f"{path}:{lineno}: point_id must be an integer") from None
            label = row[label_col]
            if tree is not None and label not in tree.leaf_name_index:
                raise UnknownLabelError(
                    f"{path}:{lineno}: label {label!r} is not a leaf of the tree"
                )
            records.append((row[0], point, label))
    return AnnotationSet(records=tuple(records))


def save_annotations(ann: AnnotationSet, path: str | Path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["image_id", "point_id", "label"])
        writer.writerows(ann.records)


# ---------------------------------------------------------------------------
# cover computation

def _category_counts(tree: LabelTree, ann: AnnotationSet, level: int):
    """Pooled and per-image category counts at the given level."""
    pooled: dict[str, int] = {}
    per_image: dict[str, dict[str, int]] = {}
    for image_id, _, label in ann.records:
        leaf = tree.leaf_id(label)
        category = tree.name(tree.ancestor_at_level(leaf, level))
        pooled[category] = pooled.get(category, 0) + 1
        img = per_image.setdefault(image_id, {})
        img[category] = img.get(category, 0) + 1
    return pooled, per_image


def cover_at_level(tree: LabelTree, ann: AnnotationSet, level: int) -> CoverReport:
    """Cover proportions at tree depth ``level``, pooled and per image."""
    if level < 1:
        raise ValueError("level must be >= 1")
    if len(ann) == 0:
        raise EmptyAnnotationSetError("annotation set is empty")
    pooled, per_image = _category_counts(tree, ann, level)
    total = len(ann)
    return CoverReport(
        level=level,
        per_category={c: n / total for c, n in sorted(pooled.items())},
        n_points=total,
        per_image={
            image: {c: n / sum(counts.values()) for c, n in sorted(counts.items())}
            for image, counts in sorted(per_image.items())
        },
    )


def cover_error(
    tree: LabelTree,
    truth: AnnotationSet,
    predicted: AnnotationSet,
    level: int,
) -> CoverErrorReport:
    """Absolute per-category cover error at ``level`` between two annotation
    sets over the same points."""
    if truth.keys() != predicted.keys():
        raise KeyMismatchError(
            "truth and predicted annotation sets cover different (image, point) keys"
        )
    true_report = cover_at_level(tree, truth, level)
    pred_report = cover_at_level(tree, predicted, level)

    categories = sorted(set(true_report.per_category) | set(pred_report.per_category))
    per_category = {
        c: abs(true_report.per_category.get(c, 0.0) - pred_report.per_category.get(c, 0.0))
        for c in categories
    }
    total = sum(per_category.values())

    image_errors = []
    for image in true_report.per_image:
        t_img = true_report.per_image[image]
        p_img = pred_report.per_image.get(image, {})
        cats = set(t_img) | set(p_img)
        image_errors.append(sum(abs(t_img.get(c, 0.0) - p_img.get(c, 0.0)) for c in cats))
    return CoverErrorReport(
        level=level,
        per_category=per_category,
        total_abs_error=total,
        mean_abs_error=sum(image_errors) / len(image_errors),
    )
