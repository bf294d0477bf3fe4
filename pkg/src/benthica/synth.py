"""Synthetic hierarchical datasets with survey-like class imbalance.

The generator embeds the label tree in feature space as a Gaussian
mixture: every node inherits its parent's mean plus a per-level random
displacement, and samples scatter around their leaf's mean.  Decreasing
the displacement scale with depth puts siblings closer together than
cousins, which is exactly what makes the hierarchy informative to a
classifier.  Leaf counts follow either a constant or a rank power law, so
a handful of head classes can dominate the way real point-count surveys
do.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .data import Dataset
from .tree import LabelTree, parse_tree

POINTS_PER_IMAGE = 25


@dataclass(frozen=True)
class SynthSpec:
    """Recipe for one synthetic dataset.

    Exactly one of ``samples_per_leaf`` (constant counts) or
    ``total_samples`` + ``alpha`` (rank power-law counts, every leaf gets
    at least one sample) must be given.  ``level_spread[k]`` scales the
    mean displacement of nodes at depth k+1.
    """

    tree: LabelTree
    feature_dim: int = 64
    level_spread: tuple[float, ...] = (3.0, 2.0, 1.0)
    noise_sigma: float = 1.0
    samples_per_leaf: int | None = None
    total_samples: int | None = None
    alpha: float | None = None
    seed: int = 0

    def __post_init__(self):
        if self.feature_dim < 1:
            raise ValueError("feature_dim must be positive")
        if self.noise_sigma <= 0:
            raise ValueError("noise_sigma must be positive")
        depth = self.tree.max_depth
        if len(self.level_spread) < depth:
            raise ValueError(
                f"level_spread has {len(self.level_spread)} entries but the "
                f"tree is {depth} levels deep"
            )
        if any(s <= 0 for s in self.level_spread):
            raise ValueError("level_spread entries must be positive")
        if any(b >= a for a, b in zip(self.level_spread, self.level_spread[1:])):
            warnings.warn(
                "level_spread is not strictly decreasing; siblings may end up "
                "no closer than cousins, making the hierarchy uninformative",
                stacklevel=2,
            )
        constant = self.samples_per_leaf is not None
        powerlaw = self.total_samples is not None or self.alpha is not None
        if constant == powerlaw:
            raise ValueError(
                "give either samples_per_leaf or total_samples with alpha"
            )
        if constant and self.samples_per_leaf < 1:
            raise ValueError("samples_per_leaf must be positive")
        if powerlaw:
            if self.total_samples is None or self.alpha is None:
                raise ValueError("power-law mode needs both total_samples and alpha")
            n_leaves = len(self.tree.leaf_ids())
            if self.total_samples < n_leaves:
                raise ValueError(
                    f"total_samples={self.total_samples} cannot cover "
                    f"{n_leaves} leaves with at least one sample each"
                )


def gen_tree(branching: list[int], seed: int = 0) -> LabelTree:
    """Complete tree with ``branching[k]`` children at level k.

    Names encode the child-index path (n0, n0-1, ...), so they are unique
    by construction.  The result is deterministic; ``seed`` is accepted
    for interface symmetry with the samplers but has no effect.
    """
    del seed
    if not branching:
        raise ValueError("branching must be non-empty")
    if any(b < 1 for b in branching):
        raise ValueError("branching factors must be positive")
    lines = ["Root"]

    def emit(prefix: str, depth: int) -> None:
        if depth == len(branching):
            return
        for i in range(branching[depth]):
            name = f"n{i}" if not prefix else f"{prefix}-{i}"
            lines.append("  " * (depth + 1) + name)
            emit(name, depth + 1)

    emit("", 0)
    return parse_tree("\n".join(lines) + "\n")


def power_law_counts(n_leaves: int, total: int, alpha: float) -> list[int]:
    """Integer leaf counts proportional to rank^-alpha, summing to total.

    Every leaf keeps at least one sample; rounding residue is settled by
    walking the ranks head-first, so the allocation is deterministic.
    """
    weights = np.asarray([r ** -alpha for r in range(1, n_leaves + 1)])
    raw = total * weights / weights.sum()
    counts = [max(1, int(math.floor(x + 0.5))) for x in raw]
    diff = total - sum(counts)
    i = 0
    while diff != 0:
        rank = i % n_leaves
        if diff > 0:
            counts[rank] += 1
            diff -= 1
        elif counts[rank] > 1:
            counts[rank] -= 1
            diff += 1
        i += 1
    return counts


def _node_means(spec: SynthSpec, rng: np.random.Generator) -> dict[int, np.ndarray]:
    """Per-node mean vectors, drawn in document order for determinism."""
    tree = spec.tree
    means: dict[int, np.ndarray] = {tree.root_id: np.zeros(spec.feature_dim)}
    for node in tree.nodes:
        if node.parent is None:
            continue
        sigma = spec.level_spread[node.depth - 1]
        means[node.id] = means[node.parent] + sigma * rng.standard_normal(spec.feature_dim)
    return means


def gen_samples(spec: SynthSpec) -> Dataset:
    """Draw a Dataset from the tree-structured Gaussian mixture.

    Samples are grouped into synthetic images of 25 points so the cover
    and split machinery can treat the output like survey data.  Identical
    specs produce byte-identical datasets.
    """
    rng = np.random.default_rng(spec.seed)
    tree = spec.tree
    means = _node_means(spec, rng)
    leaf_ids = tree.leaf_ids()

    if spec.samples_per_leaf is not None:
        counts = [spec.samples_per_leaf] * len(leaf_ids)
    else:
        counts = power_law_counts(len(leaf_ids), spec.total_samples, spec.alpha)

    features = []
    labels: list[str] = []
    for leaf, count in zip(leaf_ids, counts):
        block = means[leaf] + spec.noise_sigma * rng.standard_normal(
            (count, spec.feature_dim)
        )
        features.append(block)
        labels.extend([tree.name(leaf)] * count)

    n = len(labels)
    image_ids = [f"synth-{i // POINTS_PER_IMAGE:05d}" for i in range(n)]
    point_ids = [i % POINTS_PER_IMAGE for i in range(n)]
    return Dataset.from_arrays(image_ids, point_ids, labels, np.concatenate(features))
