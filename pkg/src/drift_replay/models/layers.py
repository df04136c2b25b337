"""Building blocks shared by the backbones: MLP tower, cross layer, bi-interaction pooling."""

import numpy as np

from ..errors import ShapeMismatch


def uniform_init(rng, shape, fan_in):
    bound = 1.0 / np.sqrt(fan_in)
    return rng.uniform(-bound, bound, size=shape)


def mlp_shapes(in_dim, hidden):
    shapes = {}
    for k, width in enumerate(hidden):
        shapes[f"dense_{k}_W"] = (in_dim, width)
        shapes[f"dense_{k}_b"] = (width,)
        in_dim = width
    return shapes, in_dim


def mlp_forward(params, n_hidden, x):
    """ReLU tower. Returns the last activation and the caches needed for backprop."""
    caches = []
    h = x
    for k in range(n_hidden):
        z = h @ params[f"dense_{k}_W"] + params[f"dense_{k}_b"]
        caches.append((h, z))
        h = np.maximum(z, 0.0)
    return h, caches


def mlp_backward(params, caches, dh, ps):
    for k in range(len(caches) - 1, -1, -1):
        h_in, z = caches[k]
        dz = dh * (z > 0)
        ps.outer[f"dense_{k}_W"] = (h_in, dz)
        ps.dense[f"dense_{k}_b"] = dz
        dh = dz @ params[f"dense_{k}_W"].T
    return dh


def head_forward(params, f):
    return f @ params["dense_last_W"][:, 0] + params["dense_last_b"][0]


def head_backward(params, f, dout, ps):
    d = dout[:, None]
    ps.outer["dense_last_W"] = (f, d)
    ps.dense["dense_last_b"] = d
    return d * params["dense_last_W"][:, 0][None, :]


def cross_layer(x0, x, w, b):
    """One cross layer: ``x0 * (w . x) + b + x``.

    Accepts single vectors or row-stacked batches for ``x0`` and ``x``.
    """
    x0 = np.asarray(x0, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if not (x0.shape == x.shape and x.shape[-1] == w.shape[-1] == b.shape[-1]) or w.ndim != 1:
        raise ShapeMismatch("cross_layer inputs must share one dimension")
    s = x @ w
    return x0 * (s[..., None] if x.ndim > 1 else s) + b + x


def bi_interaction(emb_list):
    """Pairwise-interaction pooling ``0.5 * ((sum v)^2 - sum v^2)`` elementwise."""
    if len(emb_list) < 2:
        raise ShapeMismatch("bi_interaction needs at least two vectors")
    vs = [np.asarray(v, dtype=np.float64) for v in emb_list]
    if any(v.shape != vs[0].shape for v in vs):
        raise ShapeMismatch("bi_interaction vectors must share one shape")
    total = np.sum(vs, axis=0)
    sq = np.sum([v * v for v in vs], axis=0)
    return 0.5 * (total * total - sq)


def bi_interaction_backward(emb_list, dpool):
    """Gradient of the pooled vector with respect to each input: ``dpool * (sum v - v_j)``."""
    total = np.sum(emb_list, axis=0)
    return [dpool * (total - v) for v in emb_list]
