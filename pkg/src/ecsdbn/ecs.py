"""Evolutionary cost-sensitive DBN training.

One DBN is pre-trained and fine-tuned on the training set, its posteriors on
that set are cached, and adaptive DE searches the per-class cost vector that
maximizes training G-mean of the cost-scaled predictions.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from . import dbn as dbn_mod
from .cost import apply_costs, check_cost_vector, predict_with_costs
from .de import evolve
from .exceptions import DataError, ShapeError
from .metrics import confusion, gmean

FORMAT_NAME = "ecsdbn-model"

# stream for cost evolution, disjoint from the network's layer streams
DE_STREAM = (1 << 32) + 2


@dataclass
class EcsDbnModel:
    dbn: dbn_mod.Dbn
    best_costs: np.ndarray
    training_fitness: float
    de_trace: list = field(default_factory=list)
    baseline_fitness: float | None = None
    generations: int = 0
    # column extremes of the raw training inputs, when the model owns its scaling
    input_min: np.ndarray | None = None
    input_max: np.ndarray | None = None


class GmeanFitness:
    """Training G-mean of cost-scaled predictions over cached posteriors.

    A plain class (not a closure) so it can be shipped to worker processes.
    """

    def __init__(self, probs, labels):
        self.probs = np.asarray(probs, dtype=np.float64)
        self.labels = np.asarray(labels)
        self.k = self.probs.shape[1]

    def __call__(self, costs):
        pred = predict_with_costs(self.probs, costs)
        return gmean(confusion(self.labels, pred, self.k))


def check_training_labels(y, k):
    y = np.asarray(y)
    if y.size and (y.min() < 0 or y.max() >= k):
        raise DataError(f"labels must lie in [0, {k})")
    counts = np.bincount(y.astype(np.int64), minlength=k)
    if np.any(counts == 0):
        raise DataError(f"classes absent from training data: {np.flatnonzero(counts == 0).tolist()}")
    return y.astype(np.int64)


def train(train_x, train_y, dbn_cfg, de_params, rng, map_fn=map):
    """Fit the network once, then evolve the cost vector.

    Parameters
    ----------
    train_x : ndarray of shape (n_samples, n_features)
        Inputs already scaled to [0, 1].
    train_y : ndarray of shape (n_samples,)
        Integer labels; every class in ``range(dbn_cfg.n_classes)`` must occur.
    dbn_cfg : DbnConfig
    de_params : DeParams
    rng : RngStream
        Drives the evolutionary search only; the network uses ``dbn_cfg.seed``.
    map_fn : callable, default=map
        Used to evaluate a generation's candidates, e.g. ``executor.map``.
    """
    train_x = np.asarray(train_x, dtype=np.float64)
    y = check_training_labels(train_y, dbn_cfg.n_classes)
    if train_x.ndim != 2 or train_x.shape[0] != y.size:
        raise ShapeError("train_x and train_y do not line up")
    net = dbn_mod.pretrain(dbn_cfg, train_x)
    net = dbn_mod.finetune(net, train_x, y, dbn_cfg)
    return fit_costs(net, train_x, y, de_params, rng, map_fn)


def fit_costs(net, train_x, train_y, de_params, rng, map_fn=map):
    """Evolve the cost vector for an already trained network."""
    y = check_training_labels(train_y, net.n_classes)
    fitness = GmeanFitness(dbn_mod.predict_proba(net, train_x), y)
    result = evolve(de_params, net.n_classes, rng, fitness, map_fn)
    baseline = fitness(np.zeros(net.n_classes))
    return EcsDbnModel(net, result.best.genes, result.best.fitness, result.trace,
                       baseline, result.generations)


def predict_scores(model, x):
    """Cost-scaled posteriors; not renormalized."""
    return apply_costs(dbn_mod.predict_proba(model.dbn, x), model.best_costs)


def predict(model, x):
    return predict_with_costs(dbn_mod.predict_proba(model.dbn, x), model.best_costs)


def save_model(model, path):
    meta = {
        "training_fitness": model.training_fitness,
        "baseline_fitness": model.baseline_fitness,
        "generations": model.generations,
    }
    extra = {}
    if model.input_min is not None:
        extra = {"input_min": model.input_min, "input_max": model.input_max}
    np.savez(path, format=np.array(FORMAT_NAME), version=np.array(dbn_mod.FORMAT_VERSION),
             meta=np.array(json.dumps(meta)), best_costs=model.best_costs,
             de_trace=np.asarray(model.de_trace, dtype=np.float64),
             **extra, **dbn_mod.dbn_to_arrays(model.dbn, prefix="dbn_"))


def load_model(path):
    with np.load(path, allow_pickle=False) as arrays:
        dbn_mod.check_format(arrays, FORMAT_NAME)
        meta = json.loads(str(arrays["meta"]))
        net = dbn_mod.dbn_from_arrays(arrays, prefix="dbn_")
        has_scale = "input_min" in arrays
        return EcsDbnModel(net, check_cost_vector(arrays["best_costs"], net.n_classes),
                           meta["training_fitness"], arrays["de_trace"].tolist(),
                           meta["baseline_fitness"], meta["generations"],
                           arrays["input_min"] if has_scale else None,
                           arrays["input_max"] if has_scale else None)
