"""Top-down local-classifier-per-parent-node model and the flat baseline.

Both are scikit-learn style estimators (``fit(X, y)`` / ``predict(X)``,
``get_params``) over a shared :class:`~benthica.tree.LabelTree`, so they
compose with the wider ecosystem.  ``y`` is an array of leaf names.

The hierarchical model places one softmax network at every internal node
that saw training samples under at least two children; prediction descends
greedily from the root to a leaf.  Nodes where only one child received data
become pass-throughs, which avoids degenerate one-class softmax heads.
Leaves with zero training samples are unreachable and are recorded with a
warning.
"""

from __future__ import annotations

import hashlib
import json
import warnings
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.exceptions import NotFittedError

from ._validation import check_feature_matrix
from .errors import (
    DimensionMismatchError,
    EmptyTrainingSetError,
    LabelNotInTreeError,
    NoTrainedPathError,
)
from .mlp import MLP, TrainConfig, init_mlp, predict_proba, train_mlp
from .tree import LabelTree, format_tree, parse_tree

BUNDLE_VERSION = 1
MANIFEST_NAME = "manifest.json"
PARAMS_NAME = "params.npz"
TREE_NAME = "tree.txt"


def node_seed(base_seed: int, node_id: int) -> int:
    """Stable per-node RNG seed, independent of training schedule."""
    digest = hashlib.blake2s(f"{base_seed}:{node_id}".encode(), digest_size=8).digest()
    return int.from_bytes(digest, "big")


@dataclass(frozen=True)
class PredictionPath:
    """Greedy root-to-leaf descent: visited nodes (root excluded) with the
    probability taken at each step.  Pass-through steps carry probability 1."""

    node_ids: tuple[int, ...]
    node_names: tuple[str, ...]
    probs: tuple[float, ...]
    leaf: str

    @property
    def joint_probability(self) -> float:
        return float(np.prod(self.probs)) if self.probs else 1.0


@dataclass
class _NodeClassifier:
    mlp: MLP
    child_ids: tuple[int, ...]  # trained children, tree document order


class _TreeEstimatorBase(BaseEstimator, ClassifierMixin):
    def __init__(self, tree, config=None, hidden_sizes=(200, 100), standardize=True):
        self.tree = tree
        self.config = config
        self.hidden_sizes = hidden_sizes
        self.standardize = standardize

    def _effective_config(self) -> TrainConfig:
        return self.config if self.config is not None else TrainConfig()

    def _start_fit(self, X, y):
        X = check_feature_matrix(X)
        y = np.asarray(y, dtype=object)
        if len(X) != len(y):
            raise ValueError("X and y must have the same length")
        if len(X) == 0:
            raise EmptyTrainingSetError("training set is empty")
        leaf_index = self.tree.leaf_name_index
        for label in y:
            if label not in leaf_index:
                raise LabelNotInTreeError(f"label {label!r} is not a leaf of the tree")
        if self.standardize:
            mean = X.mean(axis=0)
            std = X.std(axis=0)
            scale = np.where(std < 1e-12, 1.0, std)
        else:
            mean = np.zeros(X.shape[1])
            scale = np.ones(X.shape[1])
        self.feature_mean_ = mean
        self.feature_scale_ = scale
        self.n_features_in_ = X.shape[1]
        return (X - mean) / scale, y

    def _transform(self, X) -> np.ndarray:
        X = check_feature_matrix(X)
        if X.shape[1] != self.n_features_in_:
            raise DimensionMismatchError(
                f"input has {X.shape[1]} features, model expects {self.n_features_in_}"
            )
        return (X - self.feature_mean_) / self.feature_scale_

    def _check_fitted(self, attr: str):
        if not hasattr(self, attr):
            raise NotFittedError(
                f"this {type(self).__name__} instance is not fitted yet"
            )


class HierarchicalClassifier(_TreeEstimatorBase):
    """Local classifier per parent node, predicting top-down to a leaf.

    Parameters
    ----------
    tree : LabelTree
        The label hierarchy; training labels must be leaves of it.
    config : TrainConfig, optional
        Training hyperparameters shared by every node classifier.  Each
        node trains under its own seed derived from ``config.seed`` and the
        node id, so concurrent or reordered node training cannot change the
        result.
    hidden_sizes : tuple of int
        Hidden layer widths of every node network.
    standardize : bool
        Fit per-dimension standardization on the training features and
        apply it everywhere (default on).

    Attributes
    ----------
    node_classifiers_ : dict mapping node id to fitted node head
    pass_through_ : dict mapping node id to its single trained child
    unreachable_leaves_ : list of leaf names with no training samples
    """

    def fit(self, X, y):
        Xs, y = self._start_fit(X, y)
        tree: LabelTree = self.tree
        config = self._effective_config()

        routed: dict[int, dict[int, list[int]]] = {}
        leaf_counts: dict[int, int] = {}
        for i, label in enumerate(y):
            leaf = tree.leaf_id(label)
            leaf_counts[leaf] = leaf_counts.get(leaf, 0) + 1
            path = [tree.root_id] + tree.ancestors(leaf)
            for parent, child in zip(path[:-1], path[1:]):
                routed.setdefault(parent, {}).setdefault(child, []).append(i)

        self.node_classifiers_ = {}
        self.pass_through_ = {}
        for node in tree.nodes:
            if node.is_leaf or node.id not in routed:
                continue
            by_child = routed[node.id]
            trained = tuple(c for c in node.children if c in by_child)
            if len(trained) == 1:
                self.pass_through_[node.id] = trained[0]
                continue
            rows = np.concatenate([by_child[c] for c in trained])
            targets = np.concatenate(
                [np.full(len(by_child[c]), k, dtype=np.intp) for k, c in enumerate(trained)]
            )
            seed = node_seed(config.seed, node.id)
            net = init_mlp(Xs.shape[1], len(trained), seed, self.hidden_sizes)
            net, _ = train_mlp(
                net, Xs[rows], targets,
                TrainConfig(**{**asdict(config), "seed": seed}),
            )
            self.node_classifiers_[node.id] = _NodeClassifier(net, trained)

        trained_leaves = [
            n.name for n in tree.nodes if n.is_leaf and leaf_counts.get(n.id, 0) > 0
        ]
        self.unreachable_leaves_ = [
            n.name for n in tree.nodes if n.is_leaf and leaf_counts.get(n.id, 0) == 0
        ]
        if self.unreachable_leaves_:
            warnings.warn(
                f"{len(self.unreachable_leaves_)} leaves received no training "
                f"samples and cannot be predicted: {self.unreachable_leaves_}",
                stacklevel=2,
            )
        self.classes_ = np.asarray(trained_leaves, dtype=object)
        return self

    def _descend_batch(self, node_id: int, idx: np.ndarray, Xs: np.ndarray, out: np.ndarray):
        tree: LabelTree = self.tree
        node = tree.node(node_id)
        if node.is_leaf:
            out[idx] = node.name
            return
        head = self.node_classifiers_.get(node_id)
        if head is not None:
            probs = predict_proba(head.mlp, Xs[idx])
            choice = probs.argmax(axis=1)
            for k, child in enumerate(head.child_ids):
                sub = idx[choice == k]
                if len(sub):
                    self._descend_batch(child, sub, Xs, out)
            return
        child = self.pass_through_.get(node_id)
        if child is None:
            raise NoTrainedPathError(
                f"no trained route below node {node.name!r} (id {node_id})"
            )
        self._descend_batch(child, idx, Xs, out)

    def predict(self, X) -> np.ndarray:
        """Greedy top-down leaf prediction for each row of ``X``."""
        self._check_fitted("node_classifiers_")
        Xs = self._transform(X)
        out = np.empty(len(Xs), dtype=object)
        if len(Xs):
            self._descend_batch(self.tree.root_id, np.arange(len(Xs)), Xs, out)
        return out

    def predict_path(self, x) -> PredictionPath:
        """Full descent record for one feature vector.

        Ties at a node resolve to the earliest child in tree document
        order (numpy argmax picks the first maximum).
        """
        self._check_fitted("node_classifiers_")
        x = np.asarray(x, dtype=np.float64)
        if x.ndim != 1:
            raise DimensionMismatchError("predict_path expects a single feature vector")
        xs = self._transform(x[None, :])
        tree: LabelTree = self.tree
        node_id = tree.root_id
        ids: list[int] = []
        probs: list[float] = []
        while not tree.is_leaf(node_id):
            head = self.node_classifiers_.get(node_id)
            if head is not None:
                p = predict_proba(head.mlp, xs[0])
                k = int(np.argmax(p))
                node_id = head.child_ids[k]
                probs.append(float(p[k]))
            elif node_id in self.pass_through_:
                node_id = self.pass_through_[node_id]
                probs.append(1.0)
            else:
                raise NoTrainedPathError(
                    f"no trained route below node {tree.name(node_id)!r}"
                )
            ids.append(node_id)
        return PredictionPath(
            node_ids=tuple(ids),
            node_names=tuple(tree.name(i) for i in ids),
            probs=tuple(probs),
            leaf=tree.name(node_id),
        )


class FlatLeafClassifier(_TreeEstimatorBase):
    """Single softmax network over every leaf that has training samples.

    This is the bottom-up baseline: the hierarchy plays no role during
    training, and coarse covers are obtained later by grouping predicted
    leaves.  Uses the same network, seed derivation (anchored at the root
    node), and standardization as the hierarchical model, so on a depth-1
    tree the two estimators are parameter-identical.
    """

    def fit(self, X, y):
        Xs, y = self._start_fit(X, y)
        tree: LabelTree = self.tree
        config = self._effective_config()

        present = set(y.tolist())
        leaf_order = [name for name in tree.leaf_names() if name in present]
        if len(leaf_order) < 2:
            raise EmptyTrainingSetError(
                "flat training needs at least two observed leaf classes"
            )
        index = {name: k for k, name in enumerate(leaf_order)}
        targets = np.asarray([index[label] for label in y], dtype=np.intp)

        seed = node_seed(config.seed, tree.root_id)
        net = init_mlp(Xs.shape[1], len(leaf_order), seed, self.hidden_sizes)
        net, _ = train_mlp(
            net, Xs, targets, TrainConfig(**{**asdict(config), "seed": seed})
        )
        self.classifier_ = net
        self.leaf_order_ = leaf_order
        self.unreachable_leaves_ = [
            name for name in tree.leaf_names() if name not in present
        ]
        self.classes_ = np.asarray(leaf_order, dtype=object)
        return self

    def predict_proba(self, X) -> np.ndarray:
        self._check_fitted("classifier_")
        return predict_proba(self.classifier_, self._transform(X))

    def predict(self, X) -> np.ndarray:
        """Argmax leaf; ties resolve to the earliest leaf in document order."""
        probs = self.predict_proba(X)
        order = np.asarray(self.leaf_order_, dtype=object)
        return order[probs.argmax(axis=1)]


# ---------------------------------------------------------------------------
# model bundles

def save_model(model, dirpath: str | Path) -> None:
    """Write a fitted estimator as a bundle directory.

    Layout: ``tree.txt`` (normalized tree document), ``manifest.json``
    (everything except raw parameters), ``params.npz`` (all network
    parameters, keyed by node id).
    """
    if isinstance(model, HierarchicalClassifier):
        model._check_fitted("node_classifiers_")
    else:
        model._check_fitted("classifier_")
    dirpath = Path(dirpath)
    dirpath.mkdir(parents=True, exist_ok=True)
    (dirpath / TREE_NAME).write_text(format_tree(model.tree), encoding="utf-8")

    manifest = {
        "format_version": BUNDLE_VERSION,
        "feature_dim": int(model.n_features_in_),
        "hidden_sizes": list(model.hidden_sizes),
        "standardize": bool(model.standardize),
        "feature_mean": model.feature_mean_.tolist(),
        "feature_scale": model.feature_scale_.tolist(),
        "config": asdict(model._effective_config()),
        "unreachable_leaves": list(model.unreachable_leaves_),
    }
    arrays: dict[str, np.ndarray] = {}
    if isinstance(model, HierarchicalClassifier):
        manifest["model_type"] = "hierarchical"
        manifest["nodes"] = [
            {
                "node_id": nid,
                "layer_sizes": head.mlp.layer_sizes,
                "child_ids": list(head.child_ids),
            }
            for nid, head in sorted(model.node_classifiers_.items())
        ]
        manifest["pass_through"] = {
            str(k): v for k, v in sorted(model.pass_through_.items())
        }
        for nid, head in model.node_classifiers_.items():
            for i, w in enumerate(head.mlp.weights):
                arrays[f"n{nid}_W{i}"] = w
            for i, b in enumerate(head.mlp.biases):
                arrays[f"n{nid}_b{i}"] = b
    else:
        manifest["model_type"] = "flat"
        manifest["leaf_order"] = list(model.leaf_order_)
        manifest["layer_sizes"] = model.classifier_.layer_sizes
        for i, w in enumerate(model.classifier_.weights):
            arrays[f"flat_W{i}"] = w
        for i, b in enumerate(model.classifier_.biases):
            arrays[f"flat_b{i}"] = b

    with (dirpath / MANIFEST_NAME).open("w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    np.savez(dirpath / PARAMS_NAME, **arrays)


def load_model(dirpath: str | Path):
    """Reconstruct a fitted estimator from a bundle directory."""
    dirpath = Path(dirpath)
    manifest = json.loads((dirpath / MANIFEST_NAME).read_text(encoding="utf-8"))
    if manifest.get("format_version") != BUNDLE_VERSION:
        raise ValueError(f"unsupported bundle version {manifest.get('format_version')}")
    tree = parse_tree((dirpath / TREE_NAME).read_text(encoding="utf-8"))
    config = TrainConfig(**manifest["config"])
    kwargs = dict(
        tree=tree,
        config=config,
        hidden_sizes=tuple(manifest["hidden_sizes"]),
        standardize=manifest["standardize"],
    )

    def _mlp(data, prefix: str, layer_sizes: list[int]) -> MLP:
        n = len(layer_sizes) - 1
        return MLP(
            layer_sizes=list(layer_sizes),
            weights=[data[f"{prefix}_W{i}"] for i in range(n)],
            biases=[data[f"{prefix}_b{i}"] for i in range(n)],
        )

    with np.load(dirpath / PARAMS_NAME) as data:
        if manifest["model_type"] == "hierarchical":
            model = HierarchicalClassifier(**kwargs)
            model.node_classifiers_ = {
                entry["node_id"]: _NodeClassifier(
                    _mlp(data, f"n{entry['node_id']}", entry["layer_sizes"]),
                    tuple(entry["child_ids"]),
                )
                for entry in manifest["nodes"]
            }
            model.pass_through_ = {
                int(k): v for k, v in manifest["pass_through"].items()
            }
        else:
            model = FlatLeafClassifier(**kwargs)
            model.classifier_ = _mlp(data, "flat", manifest["layer_sizes"])
            model.leaf_order_ = list(manifest["leaf_order"])
            model.classes_ = np.asarray(model.leaf_order_, dtype=object)

    model.feature_mean_ = np.asarray(manifest["feature_mean"], dtype=np.float64)
    model.feature_scale_ = np.asarray(manifest["feature_scale"], dtype=np.float64)
    model.n_features_in_ = manifest["feature_dim"]
    model.unreachable_leaves_ = list(manifest["unreachable_leaves"])
    if manifest["model_type"] == "hierarchical":
        reachable = set(tree.leaf_names()) - set(model.unreachable_leaves_)
        model.classes_ = np.asarray(
            [n for n in tree.leaf_names() if n in reachable], dtype=object
        )
    return model
