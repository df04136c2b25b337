"""Loss-change oracles (exact one-step, full retraining) and the first-order estimate."""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..errors import EmptyDataset
from ..nn.core import ParamSelection, batch_grad, dataset_loss, per_sample_grads
from ..nn.losses import losses, targets_for
from ..nn.optim import apply_mbgd
from ..nn.params import ParamSet
from ..nn.train import TrainConfig, train
from ..records import as_arrays
from .steps import Divisor, counterfactual_step, mbgd_step, removed_position

NONCONVERGENCE_TOL = 1e-3


def one_step_loss_change_oracle(model, D_train, batch, removed, params: ParamSet, lr: float,
                                divisor=Divisor.B_MINUS_1, kind=None) -> float:
    """``L(D, step without removed) - L(D, step with full batch)``, evaluated exactly."""
    D = as_arrays(D_train)
    if len(D) == 0:
        raise EmptyDataset("one-step loss change over an empty dataset")
    theta_next = mbgd_step(model, params, batch, lr, kind)
    theta_k = counterfactual_step(model, params, batch, removed, lr, divisor, kind)
    return dataset_loss(model, theta_k, D, kind) - dataset_loss(model, theta_next, D, kind)


def one_step_loss_change_estimate(model, removed, batch, params: ParamSet, params_next: ParamSet,
                                  D_train, lr: float, kind=None, selection=ParamSelection.FULL,
                                  divisor=Divisor.B_MINUS_1) -> float:
    """First-order Taylor estimate of the one-step loss change.

    B-1 divisor: ``lr/(B-1) * g(D, params_next) . (g(removed, params) - g(batch, params))``.
    B divisor:   ``lr/B * g(D, params_next) . g(removed, params)``.
    """
    divisor = Divisor.parse(divisor)
    D = as_arrays(D_train)
    if len(D) == 0:
        raise EmptyDataset("estimate over an empty dataset")
    arrays = as_arrays(batch)
    B = len(arrays)
    k = removed_position(batch, removed)
    V = batch_grad(model, params_next, D, kind, selection)
    ps = per_sample_grads(model, params, arrays, kind, selection)
    if divisor is Divisor.B:
        return lr / B * float(ps.dot(V)[k])
    scores = ps.dot(V)
    return lr / (B - 1) * float(scores[k] - scores.mean())


def full_batch_one_step_changes(model, D_train, params: ParamSet, lr: float,
                                divisor=Divisor.B_MINUS_1, kind=None) -> np.ndarray:
    """Exact one-step loss change of every sample when the step uses all of ``D_train``.

    Vectorised equivalent of calling ``one_step_loss_change_oracle`` with
    ``batch = D_train`` for each sample in turn.
    """
    divisor = Divisor.parse(divisor)
    D = as_arrays(D_train)
    n = len(D)
    if n < 2:
        raise EmptyDataset("need at least two samples")
    kind = kind or model.head
    ps = per_sample_grads(model, params, D, kind)
    total = ps.mean().scale(n)
    y = targets_for(D, kind)
    theta_next = _apply(params, total, lr / n)
    base = float(np.mean(losses(model.predict(theta_next, D), y, kind)))
    denom = n - 1 if divisor is Divisor.B_MINUS_1 else n
    out = np.empty(n)
    for k in range(n):
        theta_k = _apply(params, total - ps.sample(k), lr / denom)
        out[k] = float(np.mean(losses(model.predict(theta_k, D), y, kind))) - base
    return out


def _apply(params, grad, step):
    return apply_mbgd(params, grad, step)


@dataclass
class RetrainResult:
    delta: float
    converged: bool
    loss_full: float
    loss_without: float


def loss_change_retrain_oracle(model, init_params: ParamSet, D, removed, cfg: TrainConfig,
                               kind=None, reference=None) -> RetrainResult:
    """Loss change from training with and without one sample.

    Both runs start from ``init_params`` with the same shuffle seed; the
    counterfactual run sees the same batches minus the removed sample.
    ``reference`` may carry a precomputed full-data ``TrainResult``.
    """
    arrays = as_arrays(D)
    if len(arrays) < 2:
        raise EmptyDataset("removing the only sample leaves nothing to train on")
    k = removed_position(arrays, removed)
    full = reference or train(model, init_params, arrays, cfg, kind, track_loss=True, keep_snapshots=False)
    without = train(model, init_params, arrays, cfg, kind, exclude=k, track_loss=True, keep_snapshots=False)
    loss_full = dataset_loss(model, full.params, arrays, kind)
    loss_without = dataset_loss(model, without.params, arrays, kind)
    converged = _converged(full.epoch_losses) and _converged(without.epoch_losses)
    return RetrainResult(loss_without - loss_full, converged, loss_full, loss_without)


def _converged(epoch_losses):
    if len(epoch_losses) < 2:
        return True
    return (epoch_losses[-2] - epoch_losses[-1]) <= NONCONVERGENCE_TOL
