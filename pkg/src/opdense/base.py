"""Estimator plumbing: parameter introspection and input validation.

The estimator classes follow the fit/transform/predict convention with
``get_params``/``set_params``, so they drop into pipelines and model
selection utilities that clone estimators from their constructor
parameters.
"""

from __future__ import annotations

import inspect

import numpy as np

from .errors import DimensionMismatch, SchemaMismatch


class ParamsMixin:
    """get_params/set_params backed by the constructor signature."""

    @classmethod
    def _param_names(cls) -> list[str]:
        sig = inspect.signature(cls.__init__)
        return [
            name for name, p in sig.parameters.items()
            if name != "self" and p.kind in (p.POSITIONAL_OR_KEYWORD, p.KEYWORD_ONLY)
        ]

    def get_params(self, deep: bool = True) -> dict:
        return {name: getattr(self, name) for name in self._param_names()}

    def set_params(self, **params):
        valid = set(self._param_names())
        for name, value in params.items():
            if name not in valid:
                raise SchemaMismatch(f"invalid parameter {name!r} for {type(self).__name__}")
            setattr(self, name, value)
        return self

    def __repr__(self) -> str:
        args = ", ".join(f"{k}={v!r}" for k, v in self.get_params().items())
        return f"{type(self).__name__}({args})"


def check_matrix(X, name: str = "X") -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise DimensionMismatch(f"{name} must be a 2-D matrix, got ndim={X.ndim}")
    if X.size and not np.isfinite(X).all():
        raise SchemaMismatch(f"{name} contains non-finite values")
    return X


def check_X_y(X, y) -> tuple[np.ndarray, np.ndarray]:
    X = check_matrix(X)
    y = np.asarray(y, dtype=object).ravel()
    if X.shape[0] != y.shape[0]:
        raise DimensionMismatch(f"X has {X.shape[0]} rows but y has {y.shape[0]} entries")
    return X, y


def check_fitted(estimator, attribute: str):
    if not hasattr(estimator, attribute):
        raise SchemaMismatch(f"{type(estimator).__name__} is not fitted yet")
