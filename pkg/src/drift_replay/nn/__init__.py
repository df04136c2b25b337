"""Minimal neural-network kernel with manual backpropagation."""

from .core import (
    Model,
    ParamSelection,
    PerSample,
    batch_grad,
    dataset_loss,
    forward,
    per_sample_grad,
    per_sample_grads,
)
from .losses import LossKind, dlosses, loss, losses, sigmoid
from .optim import AdamState, apply_adam, apply_mbgd
from .params import WHOLE, ParamSet, SparseGrad
from .train import Optimizer, TrainConfig, TrainResult, epoch_batches, train

__all__ = [
    "AdamState", "LossKind", "Model", "Optimizer", "ParamSelection", "ParamSet", "PerSample",
    "SparseGrad", "TrainConfig", "TrainResult", "WHOLE", "apply_adam", "apply_mbgd",
    "batch_grad", "dataset_loss", "dlosses", "epoch_batches", "forward", "loss", "losses",
    "per_sample_grad", "per_sample_grads", "sigmoid", "train",
]
