"""From-scratch feed-forward network used by every node and flat classifier.

Architecture is input -> ReLU(200) -> ReLU(100) -> softmax by default, with
the hidden widths overridable for tests.  All arithmetic is float64 so
analytic gradients can be checked against finite differences tightly.
Training is plain mini-batch optimization, either adaptive-moment updates
(default) or vanilla gradient descent.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    DimensionMismatchError,
    InvalidDimensionError,
    LabelOutOfRangeError,
    NumericalError,
)

SERIALIZATION_VERSION = 1


@dataclass
class TrainConfig:
    """Hyperparameters for one classifier's training run.

    The adaptive-moment defaults are robust for the hundreds-to-tens-of-
    thousands sample node datasets this toolkit targets; everything is
    overridable.  ``optimizer="sgd"`` ignores the moment parameters.
    """

    learning_rate: float = 1e-3
    batch_size: int = 64
    epochs: int = 50
    seed: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    l2: float = 1e-4
    optimizer: str = "adam"
    class_weight: str | None = None

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.batch_size < 1:
            raise ValueError("batch_size must be positive")
        if self.epochs < 0:
            raise ValueError("epochs must be non-negative")
        if not (0.0 < self.beta1 < 1.0 and 0.0 < self.beta2 < 1.0):
            raise ValueError("beta1 and beta2 must be in (0, 1)")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if self.l2 < 0:
            raise ValueError("l2 must be non-negative")
        if self.optimizer not in ("adam", "sgd"):
            raise ValueError("optimizer must be 'adam' or 'sgd'")
        if self.class_weight not in (None, "balanced"):
            raise ValueError("class_weight must be None or 'balanced'")


@dataclass
class MLP:
    """Weights and biases of a fully connected softmax classifier.

    ``weights[l]`` has shape (layer_sizes[l], layer_sizes[l+1]); biases
    match the destination layer.
    """

    layer_sizes: list[int]
    weights: list[np.ndarray] = field(repr=False)
    biases: list[np.ndarray] = field(repr=False)

    @property
    def input_dim(self) -> int:
        return self.layer_sizes[0]

    @property
    def output_dim(self) -> int:
        return self.layer_sizes[-1]

    @property
    def n_params(self) -> int:
        return sum(w.size for w in self.weights) + sum(b.size for b in self.biases)

    def copy(self) -> "MLP":
        return MLP(
            layer_sizes=list(self.layer_sizes),
            weights=[w.copy() for w in self.weights],
            biases=[b.copy() for b in self.biases],
        )


def init_mlp(
    input_dim: int,
    output_dim: int,
    seed: int,
    hidden_sizes: tuple[int, ...] = (200, 100),
) -> MLP:
    """He-initialized network with zero biases, deterministic under seed."""
    if input_dim < 1:
        raise InvalidDimensionError("input_dim must be >= 1")
    if output_dim < 2:
        raise InvalidDimensionError("output_dim must be >= 2 (softmax over one class is degenerate)")
    if any(h < 1 for h in hidden_sizes):
        raise InvalidDimensionError("hidden layer sizes must be positive")
    sizes = [input_dim, *hidden_sizes, output_dim]
    rng = np.random.default_rng(seed)
    weights = []
    biases = []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        weights.append(rng.standard_normal((fan_in, fan_out)) * np.sqrt(2.0 / fan_in))
        biases.append(np.zeros(fan_out))
    return MLP(layer_sizes=sizes, weights=weights, biases=biases)


# ---------------------------------------------------------------------------
# forward / backward

def _check_width(model: MLP, X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[None, :]
    if X.ndim != 2 or X.shape[1] != model.input_dim:
        raise DimensionMismatchError(
            f"input width {X.shape[-1] if X.ndim else 0} != model input_dim {model.input_dim}"
        )
    return X


def _forward(model: MLP, X: np.ndarray):
    """Returns (activations per layer including input, pre-activations)."""
    acts = [X]
    pre = []
    a = X
    last = len(model.weights) - 1
    for l, (W, b) in enumerate(zip(model.weights, model.biases)):
        z = a @ W + b
        pre.append(z)
        a = z if l == last else np.maximum(z, 0.0)
        acts.append(a)
    return acts, pre


def _softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def predict_logits(model: MLP, X) -> np.ndarray:
    X = _check_width(model, X)
    acts, _ = _forward(model, X)
    return acts[-1]


def predict_proba(model: MLP, x) -> np.ndarray:
    """Class probabilities; accepts a single vector or a (n, d) batch.

    Uses max-subtracted softmax, so probabilities stay finite for logit
    magnitudes far beyond overflow range.
    """
    arr = np.asarray(x, dtype=np.float64)
    single = arr.ndim == 1
    probs = _softmax(predict_logits(model, arr))
    return probs[0] if single else probs


def balanced_sample_weights(y: np.ndarray) -> np.ndarray:
    """Inverse-frequency weights, normalized so they average 1."""
    y = np.asarray(y)
    classes, counts = np.unique(y, return_counts=True)
    per_class = len(y) / (len(classes) * counts.astype(np.float64))
    lookup = dict(zip(classes.tolist(), per_class.tolist()))
    return np.asarray([lookup[int(c)] for c in y])


def loss_and_gradient(
    model: MLP,
    batch_x,
    batch_y,
    l2: float = 0.0,
    sample_weights: np.ndarray | None = None,
):
    """Weighted mean cross-entropy plus L2 penalty, with backprop gradients.

    The penalty is 0.5 * l2 * sum of squared weights (biases excluded).
    Returns (loss, (weight_grads, bias_grads)) with gradients shaped like
    the parameters.
    """
    X = _check_width(model, np.asarray(batch_x, dtype=np.float64))
    y = np.asarray(batch_y, dtype=np.intp)
    if X.shape[0] == 0:
        raise ValueError("batch must be non-empty")
    if y.shape != (X.shape[0],):
        raise DimensionMismatchError("batch_y length must match batch_x rows")
    if y.min() < 0 or y.max() >= model.output_dim:
        raise LabelOutOfRangeError(
            f"labels must lie in [0, {model.output_dim}); got range "
            f"[{y.min()}, {y.max()}]"
        )
    n = X.shape[0]
    if sample_weights is None:
        w = np.full(n, 1.0 / n)
    else:
        sw = np.asarray(sample_weights, dtype=np.float64)
        if sw.shape != (n,):
            raise DimensionMismatchError("sample_weights length must match batch")
        w = sw / sw.sum()

    acts, pre = _forward(model, X)
    logits = acts[-1]
    shifted = logits - logits.max(axis=1, keepdims=True)
    log_z = np.log(np.exp(shifted).sum(axis=1))
    log_probs = shifted - log_z[:, None]
    ce = -(w * log_probs[np.arange(n), y]).sum()
    loss = ce + 0.5 * l2 * sum(float(np.sum(W * W)) for W in model.weights)

    probs = np.exp(log_probs)
    delta = probs
    delta[np.arange(n), y] -= 1.0
    delta *= w[:, None]

    weight_grads: list[np.ndarray] = [np.empty(0)] * len(model.weights)
    bias_grads: list[np.ndarray] = [np.empty(0)] * len(model.biases)
    for l in range(len(model.weights) - 1, -1, -1):
        weight_grads[l] = acts[l].T @ delta + l2 * model.weights[l]
        bias_grads[l] = delta.sum(axis=0)
        if l > 0:
            delta = (delta @ model.weights[l].T) * (pre[l - 1] > 0)
    return loss, (weight_grads, bias_grads)


# ---------------------------------------------------------------------------
# training

def train_mlp(model: MLP, X, y, config: TrainConfig) -> tuple[MLP, list[float]]:
    """Mini-batch training; returns a trained copy and per-epoch mean loss.

    Shuffling, and therefore the whole run, is deterministic under
    ``config.seed``.  Raises NumericalError if any parameter stops being
    finite after an update.
    """
    X = _check_width(model, np.asarray(X, dtype=np.float64))
    y = np.asarray(y, dtype=np.intp)
    if len(X) != len(y) or len(X) < 1:
        raise ValueError("X and y must be non-empty and the same length")

    model = model.copy()
    weights_all = (
        balanced_sample_weights(y) if config.class_weight == "balanced" else None
    )
    rng = np.random.default_rng(config.seed)

    adam_m = [np.zeros_like(w) for w in model.weights] + [np.zeros_like(b) for b in model.biases]
    adam_v = [np.zeros_like(w) for w in model.weights] + [np.zeros_like(b) for b in model.biases]
    t = 0
    history: list[float] = []

    for _ in range(config.epochs):
        order = rng.permutation(len(X))
        batch_losses = []
        for start in range(0, len(X), config.batch_size):
            idx = order[start:start + config.batch_size]
            sw = weights_all[idx] if weights_all is not None else None
            loss, (dw, db) = loss_and_gradient(
                model, X[idx], y[idx], l2=config.l2, sample_weights=sw
            )
            batch_losses.append(loss)
            params = model.weights + model.biases
            grads = dw + db
            if config.optimizer == "adam":
                t += 1
                bc1 = 1.0 - config.beta1 ** t
                bc2 = 1.0 - config.beta2 ** t
                for p, g, m, v in zip(params, grads, adam_m, adam_v):
                    m *= config.beta1
                    m += (1.0 - config.beta1) * g
                    v *= config.beta2
                    v += (1.0 - config.beta2) * g * g
                    p -= config.learning_rate * (m / bc1) / (np.sqrt(v / bc2) + config.epsilon)
            else:
                for p, g in zip(params, grads):
                    p -= config.learning_rate * g
            for p in params:
                if not np.isfinite(p).all():
                    raise NumericalError("parameter became NaN or Inf during training")
        history.append(float(np.mean(batch_losses)))
    return model, history


# ---------------------------------------------------------------------------
# serialization

def save_mlp(
    model: MLP,
    path: str | Path,
    label_order: list[str] | None = None,
    config: TrainConfig | None = None,
) -> None:
    """Single-file .npz container with a versioned JSON metadata entry."""
    meta = {
        "format_version": SERIALIZATION_VERSION,
        "layer_sizes": model.layer_sizes,
        "label_order": label_order,
        "config": asdict(config) if config is not None else None,
    }
    arrays = {f"W{i}": w for i, w in enumerate(model.weights)}
    arrays.update({f"b{i}": b for i, b in enumerate(model.biases)})
    np.savez(Path(path), meta=np.asarray(json.dumps(meta)), **arrays)


def load_mlp(path: str | Path) -> tuple[MLP, dict]:
    """Inverse of :func:`save_mlp`; returns (model, metadata dict)."""
    with np.load(Path(path)) as data:
        meta = json.loads(str(data["meta"]))
        if meta.get("format_version") != SERIALIZATION_VERSION:
            raise ValueError(
                f"unsupported model format version {meta.get('format_version')}"
            )
        n_layers = len(meta["layer_sizes"]) - 1
        weights = [data[f"W{i}"] for i in range(n_layers)]
        biases = [data[f"b{i}"] for i in range(n_layers)]
    model = MLP(layer_sizes=list(meta["layer_sizes"]), weights=weights, biases=biases)
    return model, meta
