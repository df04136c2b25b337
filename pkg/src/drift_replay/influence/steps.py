"""Mini-batch gradient descent steps with and without one removed sample."""

import enum
from typing import Optional

import numpy as np

from ..errors import EmptyBatch, NotInBatch
from ..nn.core import ParamSelection, batch_grad, per_sample_grads
from ..nn.optim import apply_mbgd
from ..nn.params import ParamSet, SparseGrad
from ..records import InteractionRecord, as_arrays


class Divisor(enum.Enum):
    B_MINUS_1 = "b-1"   # exact removal: mean over the B-1 remaining samples
    B = "b"             # keeps the 1/B scale, which drops the batch-mean term

    @classmethod
    def parse(cls, value) -> "Divisor":
        if isinstance(value, cls):
            return value
        v = str(value).lower().replace(" ", "")
        if v in ("b-1", "bminus1", "b_minus_1"):
            return cls.B_MINUS_1
        if v == "b":
            return cls.B
        raise ValueError(f"unknown divisor {value!r}")


def removed_position(batch, removed) -> int:
    """Position of ``removed`` in ``batch``.

    ``removed`` is either a position or a record (first equal record wins).
    """
    arrays = as_arrays(batch)
    n = len(arrays)
    if isinstance(removed, (int, np.integer)):
        if not 0 <= removed < n:
            raise NotInBatch(f"position {removed} outside a batch of {n}")
        return int(removed)
    if isinstance(removed, InteractionRecord):
        records = batch if not hasattr(batch, "to_records") else batch.to_records()
        for pos, rec in enumerate(records):
            if rec == removed:
                return pos
    raise NotInBatch(f"{removed!r} is not in the batch")


def mbgd_step(model, params: ParamSet, batch, lr: float, kind=None) -> ParamSet:
    """``params - lr * mean_z g(z, params)`` over the batch."""
    arrays = as_arrays(batch)
    if len(arrays) == 0:
        raise EmptyBatch("MBGD step on an empty batch")
    return apply_mbgd(params, batch_grad(model, params, arrays, kind), lr)


def counterfactual_step(model, params: ParamSet, batch, removed, lr: float,
                        divisor=Divisor.B_MINUS_1, kind=None) -> ParamSet:
    """The same MBGD step with one sample left out of the batch.

    ``params - (lr / divisor) * sum_{z != removed} g(z, params)``.
    """
    divisor = Divisor.parse(divisor)
    arrays = as_arrays(batch)
    B = len(arrays)
    if B < 2:
        raise EmptyBatch("removing a sample needs a batch of at least two")
    k = removed_position(batch, removed)
    rest = arrays.take(np.delete(np.arange(B), k))
    total = batch_grad(model, params, rest, kind).scale(B - 1)   # sum over the remaining samples
    denom = B - 1 if divisor is Divisor.B_MINUS_1 else B
    return apply_mbgd(params, total, lr / denom)


def closed_form_delta(g_removed: SparseGrad, g_mean: SparseGrad, lr: float, batch_size: int) -> SparseGrad:
    """``lr / (B-1) * (g_removed - g_mean)``: counterfactual minus regular update."""
    if batch_size < 2:
        raise EmptyBatch("batch size must be at least two")
    return (g_removed - g_mean).scale(lr / (batch_size - 1))


def param_delta_closed_form(model, params: ParamSet, batch, removed, lr: float, kind=None,
                            selection=ParamSelection.FULL) -> SparseGrad:
    """Closed-form parameter difference between the counterfactual (B-1) and regular step."""
    arrays = as_arrays(batch)
    B = len(arrays)
    if B < 2:
        raise EmptyBatch("batch size must be at least two")
    k = removed_position(batch, removed)
    ps = per_sample_grads(model, params, arrays, kind, selection)
    return closed_form_delta(ps.sample(k), ps.mean(), lr, B)
