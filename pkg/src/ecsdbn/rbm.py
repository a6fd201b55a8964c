"""Bernoulli restricted Boltzmann machine trained with CD-k."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import ParameterError, ShapeError
from .numerics import sigmoid


@dataclass
class CdConfig:
    learning_rate: float = 0.01
    epochs: int = 100
    batch_size: int = 10
    gibbs_steps: int = 1

    def __post_init__(self):
        if not self.learning_rate >= 0:
            raise ParameterError("learning_rate must be non-negative")
        if self.epochs < 1 or self.batch_size < 1 or self.gibbs_steps < 1:
            raise ParameterError("epochs, batch_size and gibbs_steps must be >= 1")


@dataclass
class Rbm:
    """Weights are ``(n_visible, n_hidden)``."""

    weights: np.ndarray
    visible_bias: np.ndarray
    hidden_bias: np.ndarray

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=np.float64)
        self.visible_bias = np.asarray(self.visible_bias, dtype=np.float64).reshape(-1)
        self.hidden_bias = np.asarray(self.hidden_bias, dtype=np.float64).reshape(-1)
        if self.weights.shape != (self.visible_bias.size, self.hidden_bias.size):
            raise ShapeError(
                f"weights {self.weights.shape} inconsistent with biases "
                f"({self.visible_bias.size}, {self.hidden_bias.size})"
            )

    @property
    def n_visible(self):
        return self.weights.shape[0]

    @property
    def n_hidden(self):
        return self.weights.shape[1]

    def copy(self):
        return Rbm(self.weights.copy(), self.visible_bias.copy(), self.hidden_bias.copy())


def init_rbm(n_visible, n_hidden, rng):
    """Small Gaussian weights (std 0.01), zero biases."""
    if n_visible < 1 or n_hidden < 1:
        raise ParameterError("layer widths must be positive")
    w = rng.normal(0.0, 0.01, size=(n_visible, n_hidden))
    return Rbm(w, np.zeros(n_visible), np.zeros(n_hidden))


def _as_batch(m, width, what):
    m = np.asarray(m, dtype=np.float64)
    if m.ndim == 1:
        m = m.reshape(1, -1)
    if m.ndim != 2 or m.shape[1] != width:
        raise ShapeError(f"{what} has shape {m.shape}, expected (*, {width})")
    return m


def hidden_given_visible(rbm, v):
    """P(h_j = 1 | v) for every row of ``v``."""
    v = _as_batch(v, rbm.n_visible, "visible batch")
    return sigmoid(v @ rbm.weights + rbm.hidden_bias)


def visible_given_hidden(rbm, h):
    h = _as_batch(h, rbm.n_hidden, "hidden batch")
    return sigmoid(h @ rbm.weights.T + rbm.visible_bias)


def cd_train(rbm, data, cfg, rng):
    """Train a copy of ``rbm`` with mini-batch contrastive divergence.

    The positive phase samples binary hidden states; the negative phase runs
    ``cfg.gibbs_steps`` alternations and keeps mean-field probabilities for the
    gradient statistics. Per-sample gradients are summed over a batch, so
    ``learning_rate`` is the step size of a single example. Batches are
    reshuffled every epoch from ``rng``.

    Returns
    -------
    Rbm
        A new machine; the input is left untouched.
    """
    data = _as_batch(data, rbm.n_visible, "training data")
    n = data.shape[0]
    if n == 0:
        raise ParameterError("cannot train on empty data")
    out = rbm.copy()
    w, bv, bh = out.weights, out.visible_bias, out.hidden_bias
    lr = cfg.learning_rate
    bs = min(cfg.batch_size, n)
    for _ in range(cfg.epochs):
        order = rng.permutation(n)
        for start in range(0, n, bs):
            v0 = data[order[start:start + bs]]
            ph0 = sigmoid(v0 @ w + bh)
            h = rng.bernoulli(ph0)
            for step in range(cfg.gibbs_steps):
                pv = sigmoid(h @ w.T + bv)
                ph = sigmoid(pv @ w + bh)
                if step + 1 < cfg.gibbs_steps:
                    h = rng.bernoulli(ph)
            w += lr * (v0.T @ ph0 - pv.T @ ph)
            bv += lr * (v0 - pv).sum(axis=0)
            bh += lr * (ph0 - ph).sum(axis=0)
    return out


def reconstruction_error(rbm, data):
    """Mean squared error of the one-step mean-field reconstruction."""
    data = _as_batch(data, rbm.n_visible, "data")
    recon = visible_given_hidden(rbm, hidden_given_visible(rbm, data))
    return float(np.mean((data - recon) ** 2))
