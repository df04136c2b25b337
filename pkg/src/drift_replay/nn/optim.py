"""Parameter updates: plain mini-batch gradient descent and Adam."""

from dataclasses import dataclass, field
from typing import Dict

import numpy as np

from ..errors import ShapeMismatch
from .params import ParamSet, SparseGrad

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8


def _check_grad(params: ParamSet, grad: SparseGrad):
    for g, v in grad.whole.items():
        if g not in params or params[g].shape != v.shape:
            got = params[g].shape if g in params else None
            raise ShapeMismatch(f"gradient group {g} {v.shape} does not match parameters {got}")
    for g, (idx, vals) in grad.rows.items():
        if g not in params or params[g].shape[1:] != vals.shape[1:]:
            raise ShapeMismatch(f"row gradient group {g} does not match parameters")
        if len(idx) and (idx[0] < 0 or idx[-1] >= params[g].shape[0]):
            raise ShapeMismatch(f"row gradient group {g} indexes outside the table")


def apply_mbgd(params: ParamSet, grad: SparseGrad, lr: float, inplace: bool = False) -> ParamSet:
    """``params - lr * grad`` on the gradient's support only."""
    _check_grad(params, grad)
    out = params if inplace else ParamSet({k: v for k, v in params.items()})
    for g, v in grad.whole.items():
        out.groups[g] = out[g] - lr * v
    for g, (idx, vals) in grad.rows.items():
        table = out[g] if inplace else out[g].copy()
        table[idx] -= lr * vals
        out.groups[g] = table
    return out


@dataclass
class AdamState:
    m: Dict[str, np.ndarray] = field(default_factory=dict)
    v: Dict[str, np.ndarray] = field(default_factory=dict)
    t: int = 0

    def copy(self) -> "AdamState":
        return AdamState({k: a.copy() for k, a in self.m.items()},
                         {k: a.copy() for k, a in self.v.items()}, self.t)


def apply_adam(params: ParamSet, grad: SparseGrad, lr: float, state: AdamState = None,
               inplace: bool = False):
    """One Adam step; moments of rows outside the gradient support are left alone.

    Returns ``(params, state)``.
    """
    _check_grad(params, grad)
    state = AdamState() if state is None else (state if inplace else state.copy())
    out = params if inplace else ParamSet({k: v for k, v in params.items()})
    for g in params.keys():
        if g not in state.m:
            state.m[g] = np.zeros_like(params[g])
            state.v[g] = np.zeros_like(params[g])
        elif state.m[g].shape != params[g].shape:
            raise ShapeMismatch(f"Adam state for {g} has shape {state.m[g].shape}")
    state.t += 1
    c1 = 1.0 - ADAM_BETA1 ** state.t
    c2 = 1.0 - ADAM_BETA2 ** state.t
    for g, gv in grad.whole.items():
        m = state.m[g]
        v = state.v[g]
        m *= ADAM_BETA1
        m += (1.0 - ADAM_BETA1) * gv
        v *= ADAM_BETA2
        v += (1.0 - ADAM_BETA2) * gv * gv
        out.groups[g] = out[g] - lr * (m / c1) / (np.sqrt(v / c2) + ADAM_EPS)
    for g, (idx, gv) in grad.rows.items():
        m = state.m[g]
        v = state.v[g]
        m[idx] = ADAM_BETA1 * m[idx] + (1.0 - ADAM_BETA1) * gv
        v[idx] = ADAM_BETA2 * v[idx] + (1.0 - ADAM_BETA2) * gv * gv
        table = out[g] if inplace else out[g].copy()
        table[idx] -= lr * (m[idx] / c1) / (np.sqrt(v[idx] / c2) + ADAM_EPS)
        out.groups[g] = table
    return out, state
