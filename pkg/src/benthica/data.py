"""Feature-vector datasets: loading, class statistics, splits, subsampling.

File format is comma-separated text with header
``image_id,point_id,label,f0,...,f{d-1}``; labels containing commas are
quoted.  Splits operate at sample level (not image level), which mirrors how
the source survey's test set was drawn and is a documented leakage caveat.
"""

from __future__ import annotations

import csv
import math
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator

import numpy as np

from .errors import (
    MalformedRowError,
    RequestTooLargeError,
    UnknownLabelError,
)
from .tree import LabelTree


@dataclass(frozen=True)
class Sample:
    image_id: str
    point_id: int
    label: str
    features: np.ndarray


@dataclass(frozen=True)
class Dataset:
    """Columnar store of annotated feature vectors.

    ``features`` has shape (n_samples, feature_dim); rows align with
    ``image_ids``, ``point_ids``, and ``labels``.  Instances are treated as
    immutable after construction and are safe to share between workers.
    """

    image_ids: tuple[str, ...]
    point_ids: tuple[int, ...]
    labels: tuple[str, ...]
    features: np.ndarray

    @classmethod
    def from_arrays(cls, image_ids, point_ids, labels, features) -> "Dataset":
        features = np.asarray(features, dtype=np.float64)
        if features.ndim != 2:
            raise ValueError("features must be a 2-D array")
        n = features.shape[0]
        if not (len(image_ids) == len(point_ids) == len(labels) == n):
            raise ValueError("column lengths disagree")
        if features.shape[1] < 1:
            raise ValueError("feature_dim must be positive")
        return cls(
            image_ids=tuple(str(i) for i in image_ids),
            point_ids=tuple(int(p) for p in point_ids),
            labels=tuple(str(c) for c in labels),
            features=features,
        )

    def __len__(self) -> int:
        return len(self.labels)

    @property
    def feature_dim(self) -> int:
        return self.features.shape[1]

    @property
    def label_histogram(self) -> Counter:
        return Counter(self.labels)

    @property
    def samples(self) -> Iterator[Sample]:
        for i in range(len(self)):
            yield Sample(
                self.image_ids[i], self.point_ids[i], self.labels[i],
                self.features[i],
            )

    def keys(self) -> list[tuple[str, int]]:
        """(image_id, point_id) pairs in row order."""
        return list(zip(self.image_ids, self.point_ids))

    def subset(self, indices) -> "Dataset":
        idx = np.asarray(indices, dtype=np.intp)
        return Dataset(
            image_ids=tuple(self.image_ids[i] for i in idx),
            point_ids=tuple(self.point_ids[i] for i in idx),
            labels=tuple(self.labels[i] for i in idx),
            features=self.features[idx],
        )


# ---------------------------------------------------------------------------
# file I/O

def _feature_header(dim: int) -> list[str]:
    return ["image_id", "point_id", "label"] + [f"f{i}" for i in range(dim)]


def load_dataset(path: str | Path, tree: LabelTree | None) -> Dataset:
    """Load a feature-vector dataset, validating labels against ``tree``.

    Pass ``tree=None`` to skip label validation (prediction inputs whose
    label column is a placeholder).
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise MalformedRowError(f"{path}: file is empty") from None
        if header[:3] != ["image_id", "point_id", "label"]:
            raise MalformedRowError(
                f"{path}: header must start with image_id,point_id,label"
            )
        dim = len(header) - 3
        if dim < 1:
            raise MalformedRowError(
                f"{path}: no feature columns; this is an annotation-only file"
            )
        if header[3:] != [f"f{i}" for i in range(dim)]:
            raise MalformedRowError(f"{path}: feature columns must be f0..f{dim - 1}")

        image_ids: list[str] = []
        point_ids: list[int] = []
        labels: list[str] = []
        rows: list[list[float]] = []
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise MalformedRowError(
                    f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}"
                )
            try:
                point = int(row[1])
                feats = [float(v) for v in row[3:]]
            except ValueError as exc:
                raise MalformedRowError(f"{path}:{lineno}: {exc}") from None
            label = row[2]
            if tree is not None and label not in tree.leaf_name_index:
                raise UnknownLabelError(
                    f"{path}:{lineno}: label {label!r} is not a leaf of the tree"
                )
            image_ids.append(row[0])
            point_ids.append(point)
            labels.append(label)
            rows.append(feats)

    features = np.asarray(rows, dtype=np.float64)
    if features.size == 0:
        features = features.reshape(0, dim)
    return Dataset.from_arrays(image_ids, point_ids, labels, features)


def save_dataset(data: Dataset, path: str | Path) -> None:
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(_feature_header(data.feature_dim))
        for i in range(len(data)):
            writer.writerow(
                [data.image_ids[i], data.point_ids[i], data.labels[i]]
                + [repr(v) for v in data.features[i].tolist()]
            )


def read_label_column(path: str | Path) -> list[str]:
    """Labels of a dataset or annotation file, ignoring all other columns."""
    path = Path(path)
    labels = []
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or len(header) < 3 or header[:2] != ["image_id", "point_id"]:
            raise MalformedRowError(f"{path}: header must start with image_id,point_id")
        for lineno, row in enumerate(reader, start=2):
            if len(row) < 3:
                raise MalformedRowError(f"{path}:{lineno}: missing label field")
            labels.append(row[2])
    return labels


# ---------------------------------------------------------------------------
# splits

def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def stratified_split(
    data: Dataset, test_fraction: float, seed: int
) -> tuple[Dataset, Dataset]:
    """Split into (train, test), preserving per-class proportions.

    Each class with ``n_c`` samples contributes round(n_c * test_fraction)
    test samples, at least 1 when n_c >= 2 and never all n_c; singleton
    classes stay in train because a 1-sample class in test could never be
    learned.  Classes are processed in name order and sampled uniformly
    under ``seed``, so the partition is deterministic.
    """
    if not 0.0 < test_fraction < 1.0:
        raise ValueError("test_fraction must be in (0, 1)")
    by_class: dict[str, list[int]] = {}
    for i, label in enumerate(data.labels):
        by_class.setdefault(label, []).append(i)

    rng = np.random.default_rng(seed)
    test_idx: list[int] = []
    for label in sorted(by_class):
        idx = by_class[label]
        n_c = len(idx)
        if n_c == 1:
            continue
        want = _round_half_up(n_c * test_fraction)
        want = min(max(want, 1), n_c - 1)
        chosen = rng.choice(np.asarray(idx), size=want, replace=False)
        test_idx.extend(int(i) for i in chosen)

    test_mask = np.zeros(len(data), dtype=bool)
    test_mask[test_idx] = True
    train = data.subset(np.flatnonzero(~test_mask))
    test = data.subset(np.flatnonzero(test_mask))
    return train, test


def subsample_train(train: Dataset, n: int, seed: int) -> Dataset:
    """Uniform random subset of size ``n`` without replacement.

    Row order of the original dataset is preserved, so ``n == len(train)``
    returns an identical copy.
    """
    if n < 1:
        raise ValueError("n must be positive")
    if n > len(train):
        raise RequestTooLargeError(
            f"requested {n} samples from a dataset of {len(train)}"
        )
    rng = np.random.default_rng(seed)
    chosen = np.sort(rng.choice(len(train), size=n, replace=False))
    return train.subset(chosen)
