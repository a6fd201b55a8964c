"""Deep belief network: stacked RBMs topped with a softmax output layer."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exceptions import DataError, FormatError, ParameterError, ShapeError
from .numerics import RngStream, argmax_lowest, sigmoid, softmax
from .rbm import CdConfig, Rbm, cd_train, hidden_given_visible, init_rbm

FORMAT_NAME = "ecsdbn-dbn"
FORMAT_VERSION = 1

# stream ids below this are reserved for per-layer pre-training
_SOFTMAX_STREAM = 1 << 32
_FINETUNE_STREAM = (1 << 32) + 1


@dataclass
class DbnConfig:
    layer_sizes: tuple = (25, 25)
    n_classes: int = 2
    pretrain: CdConfig = field(default_factory=CdConfig)
    finetune_lr: float = 0.01
    finetune_epochs: int = 300
    finetune_batch_size: int = 10
    seed: int = 0

    def __post_init__(self):
        self.layer_sizes = tuple(int(s) for s in self.layer_sizes)
        if not self.layer_sizes or min(self.layer_sizes) < 1:
            raise ParameterError("need at least one hidden layer of positive width")
        if self.n_classes < 2:
            raise ParameterError("n_classes must be >= 2")
        if not self.finetune_lr >= 0:
            raise ParameterError("finetune_lr must be non-negative")
        if self.finetune_epochs < 0 or self.finetune_batch_size < 1:
            raise ParameterError("bad fine-tuning schedule")


@dataclass
class Dbn:
    rbm_stack: list
    softmax_weights: np.ndarray
    softmax_bias: np.ndarray

    def __post_init__(self):
        self.softmax_weights = np.asarray(self.softmax_weights, dtype=np.float64)
        self.softmax_bias = np.asarray(self.softmax_bias, dtype=np.float64).reshape(-1)
        for lower, upper in zip(self.rbm_stack, self.rbm_stack[1:]):
            if lower.n_hidden != upper.n_visible:
                raise ShapeError("adjacent RBM layers do not chain")
        top = self.rbm_stack[-1].n_hidden if self.rbm_stack else None
        if self.softmax_weights.shape != (top, self.softmax_bias.size):
            raise ShapeError("softmax layer does not match the top hidden layer")

    @property
    def n_inputs(self):
        return self.rbm_stack[0].n_visible

    @property
    def n_classes(self):
        return self.softmax_bias.size

    def copy(self):
        return Dbn([r.copy() for r in self.rbm_stack],
                   self.softmax_weights.copy(), self.softmax_bias.copy())


def _check_inputs(x, width=None):
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2:
        raise ShapeError(f"expected a 2-D sample matrix, got shape {x.shape}")
    if width is not None and x.shape[1] != width:
        raise ShapeError(f"expected {width} features, got {x.shape[1]}")
    return x


def pretrain(cfg, x):
    """Greedy layer-wise CD pre-training, bottom-up.

    Layer ``i`` is initialized and trained from ``RngStream(cfg.seed, i)`` on the
    mean-field hidden activations of layer ``i - 1``. The softmax layer gets
    small random weights from its own stream and is not trained here.
    """
    x = _check_inputs(x)
    if x.shape[0] == 0:
        raise ParameterError("cannot pre-train on empty data")
    stack = []
    inputs = x
    width = x.shape[1]
    for i, n_hidden in enumerate(cfg.layer_sizes):
        rng = RngStream(cfg.seed, i)
        rbm = cd_train(init_rbm(width, n_hidden, rng), inputs, cfg.pretrain, rng)
        stack.append(rbm)
        inputs = hidden_given_visible(rbm, inputs)
        width = n_hidden
    rng = RngStream(cfg.seed, _SOFTMAX_STREAM)
    ws = rng.normal(0.0, 0.01, size=(width, cfg.n_classes))
    return Dbn(stack, ws, np.zeros(cfg.n_classes))


def _forward(dbn, x):
    acts = [x]
    for rbm in dbn.rbm_stack:
        acts.append(sigmoid(acts[-1] @ rbm.weights + rbm.hidden_bias))
    probs = softmax(acts[-1] @ dbn.softmax_weights + dbn.softmax_bias)
    return acts, probs


def top_features(dbn, x):
    """Output of the last hidden layer."""
    x = _check_inputs(x, dbn.n_inputs)
    return _forward(dbn, x)[0][-1]


def _check_labels(y, n, k):
    y = np.asarray(y)
    if y.shape != (n,):
        raise ShapeError(f"expected {n} labels, got shape {y.shape}")
    if n and (not np.issubdtype(y.dtype, np.integer) or y.min() < 0 or y.max() >= k):
        raise DataError(f"labels must be integers in [0, {k})")
    return y.astype(np.intp)


def cross_entropy(dbn, x, y):
    """Mean negative log-likelihood of the labels."""
    x = _check_inputs(x, dbn.n_inputs)
    y = _check_labels(y, x.shape[0], dbn.n_classes)
    _, probs = _forward(dbn, x)
    return float(-np.mean(np.log(probs[np.arange(len(y)), y])))


def loss_and_gradients(dbn, x, y):
    """Mean cross-entropy and its gradient w.r.t. every trainable parameter.

    Returns
    -------
    loss : float
    grads : dict
        ``"softmax_weights"``, ``"softmax_bias"``, and per-layer lists
        ``"weights"`` / ``"hidden_bias"`` ordered bottom-up.
    """
    x = _check_inputs(x, dbn.n_inputs)
    y = _check_labels(y, x.shape[0], dbn.n_classes)
    m = x.shape[0]
    acts, probs = _forward(dbn, x)
    rows = np.arange(m)
    loss = float(-np.mean(np.log(probs[rows, y])))
    delta = probs.copy()
    delta[rows, y] -= 1.0
    delta /= m
    grads = {
        "softmax_weights": acts[-1].T @ delta,
        "softmax_bias": delta.sum(axis=0),
        "weights": [None] * len(dbn.rbm_stack),
        "hidden_bias": [None] * len(dbn.rbm_stack),
    }
    back = delta @ dbn.softmax_weights.T
    for i in range(len(dbn.rbm_stack) - 1, -1, -1):
        a = acts[i + 1]
        d = back * a * (1.0 - a)
        grads["weights"][i] = acts[i].T @ d
        grads["hidden_bias"][i] = d.sum(axis=0)
        if i:
            back = d @ dbn.rbm_stack[i].weights.T
    return loss, grads


def finetune(dbn, x, y, cfg, loss_curve=None):
    """Supervised mini-batch gradient descent through every layer.

    Per-sample gradients are summed over each batch (``finetune_lr`` is the
    step size of one example). Visible biases of the RBMs play no role in the
    feed-forward pass and are kept as pre-trained. If ``loss_curve`` is a list, the mean mini-batch
    loss of each epoch is appended to it.
    """
    x = _check_inputs(x, dbn.n_inputs)
    y = _check_labels(y, x.shape[0], dbn.n_classes)
    n = x.shape[0]
    if n == 0:
        raise ParameterError("cannot fine-tune on empty data")
    out = dbn.copy()
    rng = RngStream(cfg.seed, _FINETUNE_STREAM)
    lr = cfg.finetune_lr
    bs = min(cfg.finetune_batch_size, n)
    for _ in range(cfg.finetune_epochs):
        order = rng.permutation(n)
        total = 0.0
        for start in range(0, n, bs):
            idx = order[start:start + bs]
            loss, g = loss_and_gradients(out, x[idx], y[idx])
            total += loss * len(idx)
            # gradients are of the batch mean; rescale to the batch sum
            step = lr * len(idx)
            out.softmax_weights -= step * g["softmax_weights"]
            out.softmax_bias -= step * g["softmax_bias"]
            for rbm, gw, gb in zip(out.rbm_stack, g["weights"], g["hidden_bias"]):
                rbm.weights -= step * gw
                rbm.hidden_bias -= step * gb
        if loss_curve is not None:
            loss_curve.append(total / n)
    return out


def predict_proba(dbn, x):
    """Class posteriors, one row per sample; rows sum to 1."""
    x = _check_inputs(x, dbn.n_inputs)
    return _forward(dbn, x)[1]


def predict(dbn, x):
    return argmax_lowest(predict_proba(dbn, x))


def dbn_to_arrays(dbn, prefix=""):
    arrays = {
        f"{prefix}n_layers": np.array(len(dbn.rbm_stack)),
        f"{prefix}softmax_weights": dbn.softmax_weights,
        f"{prefix}softmax_bias": dbn.softmax_bias,
    }
    for i, rbm in enumerate(dbn.rbm_stack):
        arrays[f"{prefix}layer{i}_weights"] = rbm.weights
        arrays[f"{prefix}layer{i}_visible_bias"] = rbm.visible_bias
        arrays[f"{prefix}layer{i}_hidden_bias"] = rbm.hidden_bias
    return arrays


def dbn_from_arrays(arrays, prefix=""):
    try:
        n = int(arrays[f"{prefix}n_layers"])
        stack = [
            Rbm(arrays[f"{prefix}layer{i}_weights"],
                arrays[f"{prefix}layer{i}_visible_bias"],
                arrays[f"{prefix}layer{i}_hidden_bias"])
            for i in range(n)
        ]
        return Dbn(stack, arrays[f"{prefix}softmax_weights"], arrays[f"{prefix}softmax_bias"])
    except KeyError as exc:
        raise FormatError(f"model file is missing array {exc}") from None


def save_dbn(dbn, path):
    """Write ``dbn`` as an ``.npz`` archive tagged with a format version."""
    np.savez(path, format=np.array(FORMAT_NAME), version=np.array(FORMAT_VERSION),
             **dbn_to_arrays(dbn))


def check_format(arrays, name):
    if "format" not in arrays or str(arrays["format"]) != name:
        raise FormatError(f"not a {name} file")
    if int(arrays["version"]) > FORMAT_VERSION:
        raise FormatError(f"unsupported {name} version {int(arrays['version'])}")


def load_dbn(path):
    with np.load(path, allow_pickle=False) as arrays:
        check_format(arrays, FORMAT_NAME)
        return dbn_from_arrays(arrays)
