"""Small input-validation helpers shared by the estimators."""

from __future__ import annotations

import numpy as np

from .errors import DimensionMismatchError


def check_feature_matrix(X) -> np.ndarray:
    """Coerce to a float64 (n_samples, n_features) matrix."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[None, :]
    if X.ndim != 2:
        raise DimensionMismatchError(f"expected a 2-D feature matrix, got ndim={X.ndim}")
    if not np.isfinite(X).all():
        raise ValueError("feature matrix contains NaN or Inf")
    return X
