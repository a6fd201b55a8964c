"""scikit-learn compatible wrappers around the functional core.

>>> from sklearn.pipeline import make_pipeline
>>> clf = make_pipeline(UnitIntervalScaler(), ECSDBNClassifier(random_state=0))
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from . import dbn as dbn_mod
from . import ecs
from ._validation import check_inputs, check_training_data, resolve_seed
from .cost import cost_scaled_proba, predict_with_costs
from .de import DeParams
from .keel import apply_minmax
from .numerics import RngStream
from .rbm import CdConfig


class UnitIntervalScaler(TransformerMixin, BaseEstimator):
    """Column-wise min-max scaling to [0, 1] with clipping of unseen values.

    Constant columns map to 0.
    """

    def fit(self, X, y=None):
        X = check_array(X, dtype=np.float64)
        self.data_min_ = X.min(axis=0)
        self.data_max_ = X.max(axis=0)
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "data_min_")
        X = check_array(X, dtype=np.float64)
        return apply_minmax(X, self.data_min_, self.data_max_)


class DBNClassifier(ClassifierMixin, BaseEstimator):
    """Deep belief network classifier.

    Stacked Bernoulli RBMs are pre-trained greedily with CD-1, then the whole
    network plus a softmax output layer is fine-tuned by mini-batch gradient
    descent on cross-entropy. Inputs must lie in [0, 1].

    Parameters
    ----------
    hidden_layer_sizes : tuple of int, default=(25, 25)
    learning_rate : float, default=0.01
        CD step size during pre-training.
    pretrain_epochs : int, default=100
    finetune_lr : float, default=0.01
    finetune_epochs : int, default=300
    batch_size : int, default=10
    random_state : int or None, default=0

    Attributes
    ----------
    classes_ : ndarray of shape (n_classes,)
    dbn_ : Dbn
    loss_curve_ : list of float
        Mean training cross-entropy per fine-tuning epoch.
    """

    def __init__(self, hidden_layer_sizes=(25, 25), learning_rate=0.01, pretrain_epochs=100,
                 finetune_lr=0.01, finetune_epochs=300, batch_size=10, random_state=0):
        self.hidden_layer_sizes = hidden_layer_sizes
        self.learning_rate = learning_rate
        self.pretrain_epochs = pretrain_epochs
        self.finetune_lr = finetune_lr
        self.finetune_epochs = finetune_epochs
        self.batch_size = batch_size
        self.random_state = random_state

    def _config(self, n_classes):
        return dbn_mod.DbnConfig(
            layer_sizes=tuple(self.hidden_layer_sizes),
            n_classes=n_classes,
            pretrain=CdConfig(self.learning_rate, self.pretrain_epochs, self.batch_size),
            finetune_lr=self.finetune_lr,
            finetune_epochs=self.finetune_epochs,
            finetune_batch_size=self.batch_size,
            seed=self._seed,
        )

    def _prepare(self, X, y):
        X, y = check_training_data(X, y)
        self.classes_, y_idx = np.unique(y, return_inverse=True)
        if self.classes_.size < 2:
            raise ValueError("need samples from at least two classes")
        self.n_features_in_ = X.shape[1]
        self._seed = resolve_seed(self.random_state)
        return X, y_idx

    def _fit_network(self, X, y_idx):
        cfg = self._config(self.classes_.size)
        self.loss_curve_ = []
        net = dbn_mod.pretrain(cfg, X)
        self.dbn_ = dbn_mod.finetune(net, X, y_idx, cfg, self.loss_curve_)
        return self.dbn_

    def fit(self, X, y):
        X, y_idx = self._prepare(X, y)
        self._fit_network(X, y_idx)
        return self

    def predict_proba(self, X):
        check_is_fitted(self, "dbn_")
        return dbn_mod.predict_proba(self.dbn_, check_inputs(X, self.n_features_in_))

    def predict(self, X):
        return self.classes_[np.argmax(self.predict_proba(X), axis=1)]


class ECSDBNClassifier(DBNClassifier):
    """DBN whose per-class misclassification costs are tuned by adaptive DE.

    After the network is trained, differential evolution searches the cost
    vector in [0, 1]^K that maximizes training G-mean when each posterior
    column ``j`` is scaled by ``1 - cost[j]`` before the argmax.

    Parameters
    ----------
    population_size : int, default=30
    max_generations : int, default=100
    stagnation_window : int, default=30
        Stop once the best fitness has not changed for this many generations.
    beta : float, default=0.5
        Adaptation rate of the DE control-parameter means.

    Other parameters are those of :class:`DBNClassifier`.

    Attributes
    ----------
    costs_ : ndarray of shape (n_classes,)
    training_fitness_ : float
    de_trace_ : list of float
    model_ : EcsDbnModel
    """

    def __init__(self, hidden_layer_sizes=(25, 25), learning_rate=0.01, pretrain_epochs=100,
                 finetune_lr=0.01, finetune_epochs=300, batch_size=10, population_size=30,
                 max_generations=100, stagnation_window=30, beta=0.5, random_state=0):
        super().__init__(hidden_layer_sizes, learning_rate, pretrain_epochs, finetune_lr,
                         finetune_epochs, batch_size, random_state)
        self.population_size = population_size
        self.max_generations = max_generations
        self.stagnation_window = stagnation_window
        self.beta = beta

    def fit(self, X, y):
        X, y_idx = self._prepare(X, y)
        net = self._fit_network(X, y_idx)
        params = DeParams(self.population_size, self.max_generations, beta=self.beta,
                          stagnation_window=self.stagnation_window)
        self.model_ = ecs.fit_costs(net, X, y_idx, params, RngStream(self._seed, ecs.DE_STREAM))
        self.costs_ = self.model_.best_costs
        self.training_fitness_ = self.model_.training_fitness
        self.de_trace_ = self.model_.de_trace
        return self

    def predict_proba(self, X):
        """Cost-scaled posteriors renormalized per row."""
        return cost_scaled_proba(super().predict_proba(X), self.costs_)

    def predict(self, X):
        probs = DBNClassifier.predict_proba(self, X)
        return self.classes_[predict_with_costs(probs, self.costs_)]
