"""Wide&Deep, cross-network and bi-interaction FM backbones over user/item embeddings.

All three end in a single-output fully connected layer ``dense_last`` whose
input is the model's feature representation.
"""

import enum
from dataclasses import dataclass, field
from typing import Tuple

import numpy as np

from ..errors import InvalidArch
from ..nn.core import Model, PerSample, forward
from ..nn.losses import LossKind
from ..nn.params import ParamSet
from ..records import as_arrays
from .layers import (
    bi_interaction,
    bi_interaction_backward,
    cross_layer,
    head_backward,
    head_forward,
    mlp_backward,
    mlp_forward,
    mlp_shapes,
    uniform_init,
)


class Backbone(enum.Enum):
    WIDE_DEEP = "wdl"
    CROSS_NET = "dcn"
    BI_FM = "nfm"


@dataclass(frozen=True)
class ArchDescriptor:
    backbone: Backbone
    num_users: int
    num_items: int
    embedding_dim: int = 64
    hidden: Tuple[int, ...] = (64, 32)
    head: LossKind = LossKind.SQUARED
    cross_depth: int = 2

    def __post_init__(self):
        if not isinstance(self.backbone, Backbone):
            object.__setattr__(self, "backbone", Backbone(str(self.backbone).lower()))
        object.__setattr__(self, "head", LossKind.parse(self.head))
        object.__setattr__(self, "hidden", tuple(int(h) for h in self.hidden))
        if self.num_users < 1 or self.num_items < 1:
            raise InvalidArch("need at least one user and one item")
        if self.embedding_dim < 1:
            raise InvalidArch("embedding dimension must be >= 1")
        if any(h < 1 for h in self.hidden):
            raise InvalidArch("hidden widths must be >= 1")
        if self.backbone is Backbone.CROSS_NET and self.cross_depth < 1:
            raise InvalidArch("cross depth must be >= 1")


class _EmbeddingModel(Model):
    def __init__(self, arch: ArchDescriptor):
        self.arch = arch
        self.head = arch.head
        self.num_users = arch.num_users
        self.num_items = arch.num_items
        self.d = arch.embedding_dim
        self.n_hidden = len(arch.hidden)

    def _embed(self, params, users, items):
        return params["user_emb"][users], params["item_emb"][items]

    def _emb_shapes(self):
        return {"user_emb": (self.num_users, self.d), "item_emb": (self.num_items, self.d)}

    def init_params(self, rng):
        groups = {}
        for g, shape in self.param_shapes().items():
            groups[g] = self._init_group(rng, g, shape)
        return ParamSet(groups)

    def _init_group(self, rng, g, shape):
        if g in ("user_emb", "item_emb"):
            return uniform_init(rng, shape, self.d)
        if g.endswith("_W"):
            return uniform_init(rng, shape, shape[0])
        return np.zeros(shape)

    def features(self, params, users, items):
        self.check_ids(users, items)
        _, cache = self.forward_arrays(params, np.asarray(users), np.asarray(items))
        return cache["f"]


class WideDeep(_EmbeddingModel):
    """Wide one-hot linear part plus an MLP over ``[user_emb; item_emb]``.

    ``wide_w`` holds one scalar per user (rows 0..U-1) then one per item.
    """

    def param_shapes(self):
        shapes = self._emb_shapes()
        shapes["wide_w"] = (self.num_users + self.num_items, 1)
        shapes["wide_b"] = (1,)
        mlp, fan_in = mlp_shapes(2 * self.d, self.arch.hidden)
        shapes.update(mlp)
        shapes["dense_last_W"] = (fan_in, 1)
        shapes["dense_last_b"] = (1,)
        return shapes

    def _init_group(self, rng, g, shape):
        if g == "wide_w":
            return np.zeros(shape)
        return super()._init_group(rng, g, shape)

    def forward_arrays(self, params, users, items):
        eu, ei = self._embed(params, users, items)
        x0 = np.concatenate([eu, ei], axis=1)
        f, caches = mlp_forward(params, self.n_hidden, x0)
        wide_w = params["wide_w"][:, 0]
        wide = wide_w[users] + wide_w[self.num_users + items] + params["wide_b"][0]
        out = head_forward(params, f) + wide
        return out, {"users": users, "items": items, "f": f, "mlp": caches}

    def backward_arrays(self, params, cache, dout):
        n = len(dout)
        ps = PerSample(n)
        df = head_backward(params, cache["f"], dout, ps)
        dx0 = mlp_backward(params, cache["mlp"], df, ps)
        ps.add_rows("user_emb", cache["users"], dx0[:, :self.d])
        ps.add_rows("item_emb", cache["items"], dx0[:, self.d:])
        d1 = dout[:, None]
        ps.add_rows("wide_w", cache["users"], d1)
        ps.add_rows("wide_w", self.num_users + cache["items"], d1)
        ps.dense["wide_b"] = d1
        return ps


class CrossNet(_EmbeddingModel):
    """Cross tower and ReLU tower over ``[user_emb; item_emb]``, concatenated into ``dense_last``."""

    def param_shapes(self):
        D = 2 * self.d
        shapes = self._emb_shapes()
        for k in range(self.arch.cross_depth):
            shapes[f"cross_{k}_w"] = (D,)
            shapes[f"cross_{k}_b"] = (D,)
        mlp, deep_out = mlp_shapes(D, self.arch.hidden)
        shapes.update(mlp)
        shapes["dense_last_W"] = (D + deep_out, 1)
        shapes["dense_last_b"] = (1,)
        return shapes

    def _init_group(self, rng, g, shape):
        if g.startswith("cross_") and g.endswith("_w"):
            return uniform_init(rng, shape, shape[0])
        return super()._init_group(rng, g, shape)

    def forward_arrays(self, params, users, items):
        eu, ei = self._embed(params, users, items)
        x0 = np.concatenate([eu, ei], axis=1)
        xs = [x0]
        x = x0
        for k in range(self.arch.cross_depth):
            x = cross_layer(x0, x, params[f"cross_{k}_w"], params[f"cross_{k}_b"])
            xs.append(x)
        h, caches = mlp_forward(params, self.n_hidden, x0)
        f = np.concatenate([x, h], axis=1)
        out = head_forward(params, f)
        return out, {"users": users, "items": items, "f": f, "xs": xs, "mlp": caches}

    def backward_arrays(self, params, cache, dout):
        ps = PerSample(len(dout))
        D = 2 * self.d
        df = head_backward(params, cache["f"], dout, ps)
        dx = df[:, :D]
        dx0 = mlp_backward(params, cache["mlp"], df[:, D:], ps)
        xs = cache["xs"]
        x0 = xs[0]
        for k in range(self.arch.cross_depth - 1, -1, -1):
            w = params[f"cross_{k}_w"]
            x_in = xs[k]
            proj = np.einsum("nd,nd->n", dx, x0)      # dx . x0
            s = x_in @ w
            ps.dense[f"cross_{k}_w"] = proj[:, None] * x_in
            ps.dense[f"cross_{k}_b"] = dx
            dx0 = dx0 + dx * s[:, None]
            dx = dx + proj[:, None] * w[None, :]
        dx0 = dx0 + dx   # x_0 is x0 itself
        ps.add_rows("user_emb", cache["users"], dx0[:, :self.d])
        ps.add_rows("item_emb", cache["items"], dx0[:, self.d:])
        return ps


class BiInteractionFM(_EmbeddingModel):
    """Bi-interaction pooling into an MLP, plus global bias and per-id linear terms.

    ``fm_linear`` holds one scalar per user then one per item.
    """

    def param_shapes(self):
        shapes = self._emb_shapes()
        shapes["fm_bias"] = (1,)
        shapes["fm_linear"] = (self.num_users + self.num_items, 1)
        mlp, fan_in = mlp_shapes(self.d, self.arch.hidden)
        shapes.update(mlp)
        shapes["dense_last_W"] = (fan_in, 1)
        shapes["dense_last_b"] = (1,)
        return shapes

    def _init_group(self, rng, g, shape):
        if g == "fm_linear":
            return np.zeros(shape)
        return super()._init_group(rng, g, shape)

    def forward_arrays(self, params, users, items):
        eu, ei = self._embed(params, users, items)
        pooled = bi_interaction([eu, ei])
        f, caches = mlp_forward(params, self.n_hidden, pooled)
        lin = params["fm_linear"][:, 0]
        linear = params["fm_bias"][0] + lin[users] + lin[self.num_users + items]
        out = head_forward(params, f) + linear
        return out, {"users": users, "items": items, "f": f, "mlp": caches, "emb": (eu, ei)}

    def backward_arrays(self, params, cache, dout):
        ps = PerSample(len(dout))
        df = head_backward(params, cache["f"], dout, ps)
        dpool = mlp_backward(params, cache["mlp"], df, ps)
        deu, dei = bi_interaction_backward(list(cache["emb"]), dpool)
        ps.add_rows("user_emb", cache["users"], deu)
        ps.add_rows("item_emb", cache["items"], dei)
        d1 = dout[:, None]
        ps.dense["fm_bias"] = d1
        ps.add_rows("fm_linear", cache["users"], d1)
        ps.add_rows("fm_linear", self.num_users + cache["items"], d1)
        return ps


_BACKBONES = {
    Backbone.WIDE_DEEP: WideDeep,
    Backbone.CROSS_NET: CrossNet,
    Backbone.BI_FM: BiInteractionFM,
}


def build_model(arch: ArchDescriptor, seed: int = 0):
    """Instantiate the backbone and draw its initial parameters from ``seed``."""
    model = _BACKBONES[arch.backbone](arch)
    params = model.init_params(np.random.default_rng(seed))
    return model, params


def wide_deep_forward(model: WideDeep, params: ParamSet, record) -> float:
    return forward(model, params, record)


def extract_feature(model: Model, params: ParamSet, record) -> np.ndarray:
    """Input vector of the final fully connected layer for one record."""
    arrays = as_arrays(record)
    return model.features(params, arrays.users, arrays.items)[0]
