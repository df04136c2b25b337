"""Per-sample losses and their derivatives with respect to the model output."""

import enum

import numpy as np

from ..errors import InvalidTarget


class LossKind(enum.Enum):
    SQUARED = "squared"      # rating regression, (pred - y)^2 / 2
    LOGISTIC = "logistic"    # binary classification on a logit

    @classmethod
    def parse(cls, value) -> "LossKind":
        if isinstance(value, cls):
            return value
        aliases = {"squared": cls.SQUARED, "mse": cls.SQUARED, "rating": cls.SQUARED,
                   "logistic": cls.LOGISTIC, "bce": cls.LOGISTIC, "binary": cls.LOGISTIC}
        try:
            return aliases[str(value).lower()]
        except KeyError:
            raise ValueError(f"unknown loss kind {value!r}") from None


def sigmoid(z):
    z = np.asarray(z, dtype=np.float64)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _check_binary(y):
    y = np.asarray(y, dtype=np.float64)
    if not np.all((y == 0.0) | (y == 1.0)):
        raise InvalidTarget("logistic targets must be 0 or 1")
    return y


def losses(pred, target, kind: LossKind) -> np.ndarray:
    """Elementwise loss."""
    pred = np.asarray(pred, dtype=np.float64)
    if kind is LossKind.SQUARED:
        return 0.5 * (pred - np.asarray(target, dtype=np.float64)) ** 2
    y = _check_binary(target)
    # softplus(z) - y z, stable for large |z|
    return np.logaddexp(0.0, pred) - y * pred


def dlosses(pred, target, kind: LossKind) -> np.ndarray:
    """Elementwise derivative of the loss with respect to ``pred``."""
    pred = np.asarray(pred, dtype=np.float64)
    if kind is LossKind.SQUARED:
        return pred - np.asarray(target, dtype=np.float64)
    return sigmoid(pred) - _check_binary(target)


def loss(prediction: float, target: float, kind: LossKind) -> float:
    return float(losses(np.array([prediction]), np.array([target]), kind)[0])


def targets_for(arrays, kind: LossKind) -> np.ndarray:
    """Pick the target column matching ``kind``; logistic needs every label present."""
    if kind is LossKind.SQUARED:
        return arrays.ratings
    labels = arrays.labels
    if np.any(labels < 0):
        raise InvalidTarget("record without a binary label under a logistic head")
    return labels.astype(np.float64)
