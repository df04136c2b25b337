"""Small models used by the oracles and the correlation study."""

import numpy as np

from ..nn.core import Model, PerSample
from ..nn.losses import LossKind
from ..nn.params import ParamSet
from .layers import head_backward, head_forward, mlp_backward, mlp_forward, mlp_shapes, uniform_init


class BiasOnly(Model):
    """``prediction = bias`` for every record; the loss is quadratic in the single parameter."""

    selected_groups = ("bias",)

    def __init__(self, head=LossKind.SQUARED, num_users=1, num_items=1):
        self.head = LossKind.parse(head)
        self.num_users = num_users
        self.num_items = num_items

    def param_shapes(self):
        return {"bias": (1,)}

    def init_params(self, rng=None, value=0.0):
        return ParamSet({"bias": np.array([float(value)])})

    def forward_arrays(self, params, users, items):
        return np.full(len(users), params["bias"][0]), None

    def backward_arrays(self, params, cache, dout):
        return PerSample(len(dout), dense={"bias": dout[:, None].copy()})

    def features(self, params, users, items):
        return np.zeros((len(users), 0))


class TabularMLP(Model):
    """One-hidden-layer network over a fixed input matrix.

    A record's ``user_id`` selects the input row; ``item_id`` must be 0.
    """

    selected_groups = ("dense_last_W", "dense_last_b")

    def __init__(self, inputs, hidden=(16,), head=LossKind.LOGISTIC):
        self.inputs = np.ascontiguousarray(inputs, dtype=np.float64)
        self.hidden = tuple(hidden)
        self.head = LossKind.parse(head)
        self.num_users = len(self.inputs)
        self.num_items = 1

    def param_shapes(self):
        shapes, fan_in = mlp_shapes(self.inputs.shape[1], self.hidden)
        shapes["dense_last_W"] = (fan_in, 1)
        shapes["dense_last_b"] = (1,)
        return shapes

    def init_params(self, rng):
        groups = {}
        for g, shape in self.param_shapes().items():
            groups[g] = uniform_init(rng, shape, shape[0]) if g.endswith("_W") else np.zeros(shape)
        return ParamSet(groups)

    def forward_arrays(self, params, users, items):
        f, caches = mlp_forward(params, len(self.hidden), self.inputs[users])
        return head_forward(params, f), {"f": f, "mlp": caches}

    def backward_arrays(self, params, cache, dout):
        ps = PerSample(len(dout))
        df = head_backward(params, cache["f"], dout, ps)
        mlp_backward(params, cache["mlp"], df, ps)
        return ps

    def features(self, params, users, items):
        return self.forward_arrays(params, np.asarray(users), np.asarray(items))[1]["f"]
