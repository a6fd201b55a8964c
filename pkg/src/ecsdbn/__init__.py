"""Evolutionary cost-sensitive deep belief networks for imbalanced data."""

from .cost import apply_costs, cost_scaled_proba, predict_with_costs
from .dbn import Dbn, DbnConfig
from .de import DeParams, evolve
from .ecs import EcsDbnModel
from .estimators import DBNClassifier, ECSDBNClassifier, UnitIntervalScaler
from .keel import load_builtin, load_dataset, parse_keel, stratified_kfold
from .numerics import RngStream

__all__ = [
    "DBNClassifier",
    "Dbn",
    "DbnConfig",
    "DeParams",
    "ECSDBNClassifier",
    "EcsDbnModel",
    "RngStream",
    "UnitIntervalScaler",
    "apply_costs",
    "cost_scaled_proba",
    "evolve",
    "load_builtin",
    "load_dataset",
    "parse_keel",
    "predict_with_costs",
    "stratified_kfold",
]

__version__ = "0.1.0"
