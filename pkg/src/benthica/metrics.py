"""Flat and hierarchical evaluation, plus error-severity analysis.

Flat scores are one-vs-rest precision/recall/F1 with the 0/0 -> 0
convention.  Hierarchical scores work on ancestor-augmented label sets:
each leaf is replaced by the set of nodes on its root path (root excluded,
the leaf itself included), and precision/recall pool the set overlaps over
all samples.  A confusion between cousins therefore scores higher than one
between distant branches, which is the point: not all misclassifications
carry the same ecological cost.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .errors import LengthMismatchError, UnknownLabelError
from .tree import LabelTree


@dataclass(frozen=True)
class ClassScores:
    precision: float
    recall: float
    f1: float
    support: int


@dataclass(frozen=True)
class FlatReport:
    per_class: dict[str, ClassScores] = field(repr=False)
    macro_precision: float = 0.0
    macro_recall: float = 0.0
    macro_f1: float = 0.0
    micro_f1: float = 0.0
    weighted_f1: float = 0.0
    n_samples: int = 0


@dataclass(frozen=True)
class HierScores:
    h_precision: float
    h_recall: float
    h_f1: float


@dataclass(frozen=True)
class MetricsReport:
    """Combined flat + hierarchical evaluation of one prediction set."""

    per_class: dict[str, ClassScores] = field(repr=False)
    macro_f1: float = 0.0
    micro_f1: float = 0.0
    weighted_f1: float = 0.0
    h_precision: float = 0.0
    h_recall: float = 0.0
    h_f1: float = 0.0
    severity_histogram: dict[int, int] = field(default_factory=dict)
    n_samples: int = 0

    def to_json_dict(self) -> dict:
        return {
            "n_samples": self.n_samples,
            "flat": {
                "macro_f1": self.macro_f1,
                "micro_f1": self.micro_f1,
                "weighted_f1": self.weighted_f1,
                "per_class": {
                    name: {
                        "precision": s.precision,
                        "recall": s.recall,
                        "f1": s.f1,
                        "support": s.support,
                    }
                    for name, s in self.per_class.items()
                },
            },
            "hierarchical": {
                "h_precision": self.h_precision,
                "h_recall": self.h_recall,
                "h_f1": self.h_f1,
            },
            "severity_histogram": {str(k): v for k, v in sorted(self.severity_histogram.items())},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2, sort_keys=True)

    def format_table(self) -> str:
        lines = [
            "flat",
            f"  macro_f1     {self.macro_f1:.6f}",
            f"  micro_f1     {self.micro_f1:.6f}",
            f"  weighted_f1  {self.weighted_f1:.6f}",
            "hierarchical",
            f"  h_precision  {self.h_precision:.6f}",
            f"  h_recall     {self.h_recall:.6f}",
            f"  h_f1         {self.h_f1:.6f}",
            "severity_histogram (lca depth: errors)",
        ]
        if self.severity_histogram:
            for depth, count in sorted(self.severity_histogram.items()):
                lines.append(f"  {depth}: {count}")
        else:
            lines.append("  (no errors)")
        return "\n".join(lines)


def _f1(p: float, r: float) -> float:
    # equal operands short-circuit so exact identities (e.g. depth-1 trees,
    # where hP == hR == accuracy) survive floating point
    if p == r:
        return p
    if p + r == 0.0:
        return 0.0
    return 2.0 * p * r / (p + r)


def _ratio(num: float, den: float) -> float:
    return num / den if den else 0.0


# ---------------------------------------------------------------------------
# flat metrics

def flat_report(true_labels, pred_labels, label_set) -> FlatReport:
    """Per-class and averaged precision/recall/F1 over ``label_set``.

    Macro averages are unweighted over the whole label set, so classes with
    zero support pull the macro down by convention; micro pools counts and
    equals accuracy for single-label data; weighted averages by support.
    """
    true_labels = list(true_labels)
    pred_labels = list(pred_labels)
    if len(true_labels) != len(pred_labels):
        raise LengthMismatchError(
            f"{len(true_labels)} true labels vs {len(pred_labels)} predictions"
        )
    if not true_labels:
        raise LengthMismatchError("cannot score an empty evaluation set")
    label_set = list(label_set)
    index = {name: i for i, name in enumerate(label_set)}
    if len(index) != len(label_set):
        raise ValueError("label_set contains duplicates")
    for name in true_labels:
        if name not in index:
            raise UnknownLabelError(f"true label {name!r} not in label_set")
    for name in pred_labels:
        if name not in index:
            raise UnknownLabelError(f"predicted label {name!r} not in label_set")

    k = len(label_set)
    t = np.asarray([index[c] for c in true_labels], dtype=np.intp)
    p = np.asarray([index[c] for c in pred_labels], dtype=np.intp)
    support = np.bincount(t, minlength=k)
    predicted = np.bincount(p, minlength=k)
    tp = np.bincount(t[t == p], minlength=k)

    per_class: dict[str, ClassScores] = {}
    precisions = np.zeros(k)
    recalls = np.zeros(k)
    f1s = np.zeros(k)
    for i, name in enumerate(label_set):
        prec = _ratio(tp[i], predicted[i])
        rec = _ratio(tp[i], support[i])
        f1 = _f1(prec, rec)
        precisions[i], recalls[i], f1s[i] = prec, rec, f1
        per_class[name] = ClassScores(prec, rec, f1, int(support[i]))

    n = len(true_labels)
    micro_p = _ratio(int(tp.sum()), int(predicted.sum()))
    micro_r = _ratio(int(tp.sum()), int(support.sum()))
    return FlatReport(
        per_class=per_class,
        macro_precision=float(precisions.mean()),
        macro_recall=float(recalls.mean()),
        macro_f1=float(f1s.mean()),
        micro_f1=_f1(micro_p, micro_r),
        weighted_f1=float((f1s * support).sum() / n),
        n_samples=n,
    )


# ---------------------------------------------------------------------------
# hierarchical metrics

def _resolve_leaves(tree: LabelTree, labels) -> list[int]:
    ids = []
    for name in labels:
        ids.append(tree.leaf_id(name))
    return ids


def hier_report(tree: LabelTree, true_labels, pred_labels, average: str = "pooled") -> HierScores:
    """Hierarchical precision/recall/F1 over ancestor-augmented sets.

    ``average="pooled"`` (default) sums overlaps and set sizes over all
    samples before dividing; ``average="per_sample"`` averages the
    per-sample ratios instead.  Aggregation runs over unique
    (true, predicted) pairs, so cost scales with the confusion pattern,
    not the sample count.
    """
    if average not in ("pooled", "per_sample"):
        raise ValueError("average must be 'pooled' or 'per_sample'")
    true_labels = list(true_labels)
    pred_labels = list(pred_labels)
    if len(true_labels) != len(pred_labels):
        raise LengthMismatchError(
            f"{len(true_labels)} true labels vs {len(pred_labels)} predictions"
        )
    if not true_labels:
        raise LengthMismatchError("cannot score an empty evaluation set")
    t_ids = _resolve_leaves(tree, true_labels)
    p_ids = _resolve_leaves(tree, pred_labels)

    pairs = Counter(zip(t_ids, p_ids))
    n = len(t_ids)
    inter_sum = 0.0
    pred_sum = 0.0
    true_sum = 0.0
    hp_sum = 0.0
    hr_sum = 0.0
    for (t, p), count in pairs.items():
        # |T ∩ P| for two root paths is the depth of their junction
        overlap = tree.lca_depth(t, p)
        t_size = tree.depth(t)
        p_size = tree.depth(p)
        inter_sum += count * overlap
        true_sum += count * t_size
        pred_sum += count * p_size
        hp_sum += count * _ratio(overlap, p_size)
        hr_sum += count * _ratio(overlap, t_size)

    if average == "pooled":
        hp = _ratio(inter_sum, pred_sum)
        hr = _ratio(inter_sum, true_sum)
    else:
        hp = hp_sum / n
        hr = hr_sum / n
    return HierScores(h_precision=hp, h_recall=hr, h_f1=_f1(hp, hr))


def severity_histogram(tree: LabelTree, true_labels, pred_labels) -> dict[int, int]:
    """Misclassification counts bucketed by the depth of the deepest common
    ancestor; deeper buckets are milder confusions.  Correct predictions
    are excluded."""
    true_labels = list(true_labels)
    pred_labels = list(pred_labels)
    if len(true_labels) != len(pred_labels):
        raise LengthMismatchError(
            f"{len(true_labels)} true labels vs {len(pred_labels)} predictions"
        )
    t_ids = _resolve_leaves(tree, true_labels)
    p_ids = _resolve_leaves(tree, pred_labels)
    hist: dict[int, int] = {}
    for (t, p), count in Counter(zip(t_ids, p_ids)).items():
        if t == p:
            continue
        depth = tree.lca_depth(t, p)
        hist[depth] = hist.get(depth, 0) + count
    return dict(sorted(hist.items()))


def evaluate(
    tree: LabelTree,
    true_labels,
    pred_labels,
    label_set: list[str] | None = None,
    average: str = "pooled",
) -> MetricsReport:
    """One-call combined report.  ``label_set`` defaults to the observed
    leaves (union of true and predicted) in tree document order."""
    true_labels = list(true_labels)
    pred_labels = list(pred_labels)
    if label_set is None:
        observed = set(true_labels) | set(pred_labels)
        label_set = [name for name in tree.leaf_names() if name in observed]
    flat = flat_report(true_labels, pred_labels, label_set)
    hier = hier_report(tree, true_labels, pred_labels, average=average)
    return MetricsReport(
        per_class=flat.per_class,
        macro_f1=flat.macro_f1,
        micro_f1=flat.micro_f1,
        weighted_f1=flat.weighted_f1,
        h_precision=hier.h_precision,
        h_recall=hier.h_recall,
        h_f1=hier.h_f1,
        severity_histogram=severity_histogram(tree, true_labels, pred_labels),
        n_samples=flat.n_samples,
    )
