"""Epoch-based training with per-epoch snapshots."""

import enum
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from ..errors import EmptyDataset, InvalidConfig
from ..records import as_arrays
from .core import Model, dataset_loss, per_sample_grads
from .losses import LossKind
from .optim import AdamState, apply_adam, apply_mbgd
from .params import ParamSet


class Optimizer(enum.Enum):
    MBGD = "mbgd"
    ADAM = "adam"


@dataclass(frozen=True)
class TrainConfig:
    lr: float = 0.001
    batch_size: int = 1024
    epochs: int = 5
    optimizer: Optimizer = Optimizer.ADAM
    seed: int = 0

    def __post_init__(self):
        if not self.lr > 0:
            raise InvalidConfig("learning rate must be positive")
        if self.batch_size < 2:
            raise InvalidConfig("batch size must be at least 2")
        if self.epochs < 2:
            raise InvalidConfig("at least two epochs are needed for two snapshots")
        if not isinstance(self.optimizer, Optimizer):
            object.__setattr__(self, "optimizer", Optimizer(str(self.optimizer).lower()))


@dataclass
class TrainResult:
    params: ParamSet
    snapshots: List[ParamSet] = field(default_factory=list)   # after epoch 1..E
    epoch_losses: List[float] = field(default_factory=list)   # mean train loss after each epoch
    adam_state: Optional[AdamState] = None


def epoch_batches(n: int, batch_size: int, rng: np.random.Generator, exclude=None):
    """Shuffled batches of indices into the original ``n`` records.

    ``exclude`` drops one index after shuffling, so a run without that sample
    sees exactly the same batch composition otherwise. The last short batch is kept.
    """
    perm = rng.permutation(n)
    out = []
    for start in range(0, n, batch_size):
        b = perm[start:start + batch_size]
        if exclude is not None:
            b = b[b != exclude]
        if len(b):
            out.append(b)
    return out


def train(model: Model, params: ParamSet, data, cfg: TrainConfig, kind: Optional[LossKind] = None,
          exclude: Optional[int] = None, adam_state: Optional[AdamState] = None,
          keep_snapshots: bool = True, track_loss: bool = False) -> TrainResult:
    """Train a copy of ``params`` on ``data`` for ``cfg.epochs`` epochs.

    The shuffle stream is seeded by ``cfg.seed`` alone; two calls with the same
    config, data and initial params are bit-identical.
    """
    kind = kind or model.head
    arrays = as_arrays(data)
    if len(arrays) == 0 or (exclude is not None and len(arrays) == 1):
        raise EmptyDataset("cannot train on an empty dataset")
    params = params.copy()
    rng = np.random.default_rng(cfg.seed)
    state = adam_state.copy() if adam_state is not None else None
    result = TrainResult(params)
    for _ in range(cfg.epochs):
        for b in epoch_batches(len(arrays), cfg.batch_size, rng, exclude):
            grad = per_sample_grads(model, params, arrays.take(b), kind).mean()
            if cfg.optimizer is Optimizer.ADAM:
                params, state = apply_adam(params, grad, cfg.lr, state, inplace=True)
            else:
                params = apply_mbgd(params, grad, cfg.lr, inplace=True)
        if keep_snapshots:
            result.snapshots.append(params.copy())
        if track_loss:
            result.epoch_losses.append(dataset_loss(model, params, arrays, kind))
    result.params = params
    result.adam_state = state
    return result
