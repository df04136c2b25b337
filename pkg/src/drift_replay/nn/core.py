"""Model interface, per-sample backprop container and the gradient operations.

Every model computes its forward pass over arrays of (user, item) ids and a
backward pass that keeps per-sample pieces un-reduced. Mean batch gradients,
single-sample gradients and per-sample dot products (GGscores) are all
reductions of the same ``PerSample`` object, so they agree by construction
up to floating-point summation order.
"""

import enum
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from .. import kernels
from ..errors import EmptyBatch, EmptyDataset, IdOutOfRange, ShapeMismatch
from ..records import as_arrays
from .losses import LossKind, dlosses, losses, targets_for
from .params import ParamSet, SparseGrad


class ParamSelection(enum.Enum):
    FULL = "full"
    SELECTED = "selected"

    @classmethod
    def parse(cls, value) -> "ParamSelection":
        if isinstance(value, cls):
            return value
        return cls(str(value).lower())


@dataclass
class PerSample:
    """Un-reduced gradients for ``n`` samples.

    rows:  group -> list of (row index per sample, gradient row per sample)
    outer: group -> (input activations a, output deltas d); the weight
           gradient of sample n is ``outer(a[n], d[n])``
    dense: group -> per-sample gradient, leading axis n
    """

    n: int
    rows: Dict[str, List[Tuple[np.ndarray, np.ndarray]]] = field(default_factory=dict)
    outer: Dict[str, Tuple[np.ndarray, np.ndarray]] = field(default_factory=dict)
    dense: Dict[str, np.ndarray] = field(default_factory=dict)

    def add_rows(self, group, idx, vals):
        self.rows.setdefault(group, []).append((idx, vals))

    def groups(self):
        return set(self.rows) | set(self.outer) | set(self.dense)

    def restrict(self, groups) -> "PerSample":
        keep = set(groups)
        return PerSample(
            self.n,
            {g: v for g, v in self.rows.items() if g in keep},
            {g: v for g, v in self.outer.items() if g in keep},
            {g: v for g, v in self.dense.items() if g in keep},
        )

    def mean(self) -> SparseGrad:
        n = self.n
        whole = {g: a.T @ d / n for g, (a, d) in self.outer.items()}
        whole.update({g: v.mean(axis=0) for g, v in self.dense.items()})
        rows = {}
        for g, parts in self.rows.items():
            idx = np.concatenate([p[0] for p in parts])
            vals = np.concatenate([p[1] for p in parts]) / n
            rows[g] = (idx, vals)
        return SparseGrad(whole, rows)

    def sample(self, k: int) -> SparseGrad:
        whole = {g: np.outer(a[k], d[k]) for g, (a, d) in self.outer.items()}
        whole.update({g: v[k].copy() for g, v in self.dense.items()})
        rows = {}
        for g, parts in self.rows.items():
            rows[g] = (
                np.array([p[0][k] for p in parts], dtype=np.int64),
                np.stack([p[1][k] for p in parts]),
            )
        return SparseGrad(whole, rows)

    def dot(self, ref) -> np.ndarray:
        """Per-sample dot product with a reference (``ParamSet`` or ``SparseGrad``)."""
        if isinstance(ref, SparseGrad):
            return self._dot_sparse(ref)
        out = np.zeros(self.n)
        for g, (a, d) in self.outer.items():
            V = _ref_group(ref, g, (a.shape[1], d.shape[1]))
            out += kernels.outer_dot(a, d, V)
        for g, v in self.dense.items():
            V = _ref_group(ref, g, v.shape[1:])
            out += v.reshape(self.n, -1) @ V.ravel()
        for g, parts in self.rows.items():
            if g not in ref:
                raise ShapeMismatch(f"group {g} missing from reference")
            table = ref[g]
            for idx, vals in parts:
                out += kernels.gather_rowdot(table, idx, vals)
        return out

    def _dot_sparse(self, ref: SparseGrad) -> np.ndarray:
        out = np.zeros(self.n)
        for g, (a, d) in self.outer.items():
            if g in ref.whole:
                out += kernels.outer_dot(a, d, ref.whole[g].reshape(a.shape[1], d.shape[1]))
        for g, v in self.dense.items():
            if g in ref.whole:
                out += v.reshape(self.n, -1) @ ref.whole[g].ravel()
        for g, parts in self.rows.items():
            if g not in ref.rows:
                continue
            ridx, rvals = ref.rows[g]
            for idx, vals in parts:
                pos = np.searchsorted(ridx, idx)
                pos_c = np.minimum(pos, len(ridx) - 1)
                hit = (pos < len(ridx)) & (ridx[pos_c] == idx)
                if hit.any():
                    out[hit] += np.einsum("nd,nd->n", rvals[pos_c[hit]], vals[hit])
        return out


def _ref_group(ref, g, shape):
    if g not in ref:
        raise ShapeMismatch(f"group {g} missing from reference")
    V = ref[g]
    if V.shape != tuple(shape):
        raise ShapeMismatch(f"group {g}: expected {tuple(shape)}, got {V.shape}")
    return V


class Model:
    """Base class for every model.

    Subclasses define ``param_shapes``, ``init_params``, ``forward_arrays``
    and ``backward_arrays``; the latter returns a ``PerSample``.
    """

    head: LossKind = LossKind.SQUARED
    num_users: int = 0
    num_items: int = 0
    # groups kept under ParamSelection.SELECTED
    selected_groups: Tuple[str, ...] = ("user_emb", "item_emb", "dense_last_W", "dense_last_b")

    def param_shapes(self) -> Dict[str, Tuple[int, ...]]:
        raise NotImplementedError

    def init_params(self, rng: np.random.Generator) -> ParamSet:
        raise NotImplementedError

    def forward_arrays(self, params, users, items):
        """Return (outputs (n,), cache)."""
        raise NotImplementedError

    def backward_arrays(self, params, cache, dout) -> PerSample:
        raise NotImplementedError

    def features(self, params, users, items) -> np.ndarray:
        """Input of the final fully connected layer, one row per sample."""
        raise NotImplementedError

    def check_ids(self, users, items):
        users = np.asarray(users)
        items = np.asarray(items)
        if users.size and (users.min() < 0 or users.max() >= self.num_users):
            bad = users[(users < 0) | (users >= self.num_users)][0]
            raise IdOutOfRange(f"user id {bad} outside [0, {self.num_users})")
        if items.size and (items.min() < 0 or items.max() >= self.num_items):
            bad = items[(items < 0) | (items >= self.num_items)][0]
            raise IdOutOfRange(f"item id {bad} outside [0, {self.num_items})")

    def check_params(self, params: ParamSet):
        expected = self.param_shapes()
        for g, shape in expected.items():
            if g not in params:
                raise ShapeMismatch(f"missing parameter group {g}")
            if params[g].shape != shape:
                raise ShapeMismatch(f"group {g}: expected {shape}, got {params[g].shape}")

    def predict(self, params, data) -> np.ndarray:
        arrays = as_arrays(data)
        self.check_ids(arrays.users, arrays.items)
        out, _ = self.forward_arrays(params, arrays.users, arrays.items)
        return out


def forward(model: Model, params: ParamSet, record) -> float:
    """Prediction for a single record (a logit under logistic heads)."""
    arrays = as_arrays(record)
    return float(model.predict(params, arrays)[0])


def dataset_loss(model: Model, params: ParamSet, data, kind: Optional[LossKind] = None) -> float:
    """Mean per-sample loss over ``data``."""
    kind = kind or model.head
    arrays = as_arrays(data)
    if len(arrays) == 0:
        raise EmptyDataset("loss over an empty dataset")
    pred = model.predict(params, arrays)
    return float(np.mean(losses(pred, targets_for(arrays, kind), kind)))


def per_sample_grads(model: Model, params: ParamSet, data, kind: Optional[LossKind] = None,
                     selection=ParamSelection.FULL) -> PerSample:
    """Vectorised per-sample gradients for every record in ``data``."""
    kind = kind or model.head
    selection = ParamSelection.parse(selection)
    arrays = as_arrays(data)
    if len(arrays) == 0:
        raise EmptyBatch("no records")
    model.check_ids(arrays.users, arrays.items)
    y = targets_for(arrays, kind)
    out, cache = model.forward_arrays(params, arrays.users, arrays.items)
    ps = model.backward_arrays(params, cache, dlosses(out, y, kind))
    if selection is ParamSelection.SELECTED:
        ps = ps.restrict(model.selected_groups)
    return ps


def batch_grad(model: Model, params: ParamSet, batch, kind: Optional[LossKind] = None,
               selection=ParamSelection.FULL) -> SparseGrad:
    """Gradient of the mean loss over ``batch``."""
    arrays = as_arrays(batch)
    if len(arrays) == 0:
        raise EmptyBatch("batch_grad of an empty batch")
    return per_sample_grads(model, params, arrays, kind, selection).mean()


def per_sample_grad(model: Model, params: ParamSet, record, kind: Optional[LossKind] = None,
                    selection=ParamSelection.FULL) -> SparseGrad:
    return per_sample_grads(model, params, as_arrays(record), kind, selection).sample(0)
