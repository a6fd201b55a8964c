"""Input checks shared by the estimators."""

import numpy as np
from sklearn.utils.validation import check_array, check_X_y


def check_unit_interval(X, name="X"):
    """Reject inputs outside [0, 1]; visible units are Bernoulli probabilities."""
    if X.size and (X.min() < 0.0 or X.max() > 1.0):
        raise ValueError(
            f"{name} must be scaled to [0, 1]; put UnitIntervalScaler in front "
            "of the classifier"
        )
    return X


def check_training_data(X, y):
    X, y = check_X_y(X, y, dtype=np.float64)
    return check_unit_interval(X), y


def check_inputs(X, n_features):
    X = check_array(X, dtype=np.float64)
    if X.shape[1] != n_features:
        raise ValueError(f"X has {X.shape[1]} features, expected {n_features}")
    return check_unit_interval(X)


def resolve_seed(random_state):
    """Integer seed for the package's streams (None draws a fresh one)."""
    if random_state is None:
        return int(np.random.SeedSequence().generate_state(1, np.uint64)[0])
    if isinstance(random_state, (int, np.integer)):
        return int(random_state)
    raise ValueError("random_state must be an int or None")
