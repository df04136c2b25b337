import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from drift_replay.errors import IdOutOfRange, InvalidArch, ShapeMismatch
from drift_replay.influence.validation import jitter
from drift_replay.models import (
    ArchDescriptor, Backbone, BiInteractionFM, bi_interaction, build_model, cross_layer,
    extract_feature, wide_deep_forward,
)
from drift_replay.nn import WHOLE, LossKind, ParamSet, dataset_loss, forward, per_sample_grad
from drift_replay.records import InteractionRecord, RecordArrays

HEADS = [LossKind.SQUARED, LossKind.LOGISTIC]


def zero_params(params):
    return ParamSet({g: np.zeros_like(a) for g, a in params.items()})


# --- layer primitives -----------------------------------------------------

def test_cross_layer_examples():
    np.testing.assert_array_equal(cross_layer([1, 2], [1, 1], [1, 0], [0, 0]), [2, 3])
    np.testing.assert_array_equal(cross_layer([5, -1], [0.5, 2], [0, 0], [0, 0]), [0.5, 2])
    np.testing.assert_array_equal(cross_layer([5, -1], [0.5, 2], [0, 0], [1, -1]), [1.5, 1])


def test_cross_layer_dimension_mismatch():
    with pytest.raises(ShapeMismatch):
        cross_layer([1, 2, 3], [1, 1], [1, 0], [0, 0])


@given(st.lists(st.floats(-1e3, 1e3), min_size=1, max_size=8), st.data())
def test_cross_layer_zero_weights_is_identity(x, data):
    x0 = data.draw(st.lists(st.floats(-1e3, 1e3), min_size=len(x), max_size=len(x)))
    z = np.zeros(len(x))
    np.testing.assert_array_equal(cross_layer(x0, x, z, z), x)


def test_bi_interaction_examples():
    np.testing.assert_array_equal(bi_interaction([[1, 0], [2, 0]]), [2, 0])
    np.testing.assert_array_equal(bi_interaction([[1, 0], [0, 3]]), [0, 0])


def test_bi_interaction_negated_pair_is_minus_square():
    # the sum term cancels but the squares do not: 0.5 * (0 - 2 v^2) = -v^2
    v = np.array([1.0, 2.0])
    np.testing.assert_array_equal(bi_interaction([v, -v]), [-1.0, -4.0])


def test_bi_interaction_needs_two_vectors():
    with pytest.raises(ShapeMismatch):
        bi_interaction([[1.0, 2.0]])


@given(st.lists(st.lists(st.floats(-100, 100), min_size=3, max_size=3), min_size=2, max_size=5),
       st.randoms())
def test_bi_interaction_permutation_symmetric(vs, rnd):
    perm = list(vs)
    rnd.shuffle(perm)
    np.testing.assert_allclose(bi_interaction(vs), bi_interaction(perm), rtol=1e-9, atol=1e-6)


# --- build_model ------------------------------------------------------------

def test_wide_deep_groups_and_shapes():
    arch = ArchDescriptor("wdl", 7, 9, 64, (64, 32))
    model, params = build_model(arch, 0)
    assert params.shapes == {
        "user_emb": (7, 64), "item_emb": (9, 64), "wide_w": (16, 1), "wide_b": (1,),
        "dense_0_W": (128, 64), "dense_0_b": (64,), "dense_1_W": (64, 32), "dense_1_b": (32,),
        "dense_last_W": (32, 1), "dense_last_b": (1,),
    }
    assert not params["dense_0_b"].any() and not params["wide_w"].any()
    assert np.abs(params["user_emb"]).max() <= 1 / 8


def test_build_model_deterministic_in_seed():
    arch = ArchDescriptor("dcn", 5, 6, 8, (8, 4))
    assert build_model(arch, 3)[1].equal(build_model(arch, 3)[1])
    assert not build_model(arch, 3)[1].equal(build_model(arch, 4)[1])


def test_bifm_parameter_count_by_hand():
    _, params = build_model(ArchDescriptor("nfm", 1, 1, 2, (3,)), 0)
    # embeddings 2 + 2, global bias 1, linear 2, dense_0 2*3 + 3, dense_last 3 + 1
    assert params.num_params() == 4 + 1 + 2 + 9 + 4


@pytest.mark.parametrize("kw", [dict(num_users=0), dict(num_items=0), dict(embedding_dim=0),
                                dict(hidden=(4, 0)), dict(backbone="dcn", cross_depth=0)])
def test_invalid_arch(kw):
    base = dict(backbone="wdl", num_users=2, num_items=2, embedding_dim=2, hidden=(2,))
    base.update(kw)
    with pytest.raises(InvalidArch):
        ArchDescriptor(**base)


def test_unknown_backbone():
    with pytest.raises(ValueError):
        ArchDescriptor("mf", 2, 2)


# --- forward passes -----------------------------------------------------------

@pytest.mark.parametrize("backbone", list(Backbone))
@pytest.mark.parametrize("head", HEADS)
def test_all_zero_params_predict_zero(backbone, head):
    model, params = build_model(ArchDescriptor(backbone, 3, 4, 4, (4, 2), head), 0)
    rec = InteractionRecord(2, 3, 4.0, 0, 1)
    assert forward(model, zero_params(params), rec) == 0.0
    assert not extract_feature(model, zero_params(params), rec).any()


def test_wide_deep_dead_deep_path():
    model, params = build_model(ArchDescriptor("wdl", 2, 3, 4, (4,)), 0)
    p = zero_params(params)
    p["wide_w"][1, 0] = 0.5      # user 1
    p["wide_w"][2 + 2, 0] = 0.9  # item 2
    p["wide_b"][0] = 0.3
    assert wide_deep_forward(model, p, InteractionRecord(1, 2, 0.0, 0)) == pytest.approx(1.7, abs=1e-15)


def test_wide_deep_hand_trace_seed_1():
    model, p = build_model(ArchDescriptor("wdl", 2, 2, 2, (2,)), 1)
    p = jitter(p, np.random.default_rng(1))
    u, i = 0, 1
    x = [p["user_emb"][u, 0], p["user_emb"][u, 1], p["item_emb"][i, 0], p["item_emb"][i, 1]]
    h = []
    for j in range(2):
        z = p["dense_0_b"][j] + sum(x[r] * p["dense_0_W"][r, j] for r in range(4))
        h.append(z if z > 0 else 0.0)
    deep = p["dense_last_b"][0] + h[0] * p["dense_last_W"][0, 0] + h[1] * p["dense_last_W"][1, 0]
    wide = p["wide_w"][u, 0] + p["wide_w"][2 + i, 0] + p["wide_b"][0]
    rec = InteractionRecord(u, i, 3.0, 0)
    assert wide_deep_forward(model, p, rec) == pytest.approx(deep + wide, rel=1e-14)
    np.testing.assert_allclose(extract_feature(model, p, rec), h, rtol=1e-14)


def test_wide_deep_zero_wide_is_pure_mlp():
    model, p = build_model(ArchDescriptor("wdl", 2, 2, 2, (3,)), 4)
    p = jitter(p, np.random.default_rng(4))
    p["wide_w"][:] = 0.0
    p["wide_b"][:] = 0.0
    x = np.concatenate([p["user_emb"][1], p["item_emb"][0]])
    h = np.maximum(x @ p["dense_0_W"] + p["dense_0_b"], 0)
    want = h @ p["dense_last_W"][:, 0] + p["dense_last_b"][0]
    assert wide_deep_forward(model, p, InteractionRecord(1, 0, 1.0, 0)) == pytest.approx(want, rel=1e-14)


def test_crossnet_hand_trace():
    model, p = build_model(ArchDescriptor("dcn", 2, 2, 1, (2,), cross_depth=1), 2)
    p = jitter(p, np.random.default_rng(2))
    x0 = np.array([p["user_emb"][0, 0], p["item_emb"][1, 0]])
    x1 = x0 * (x0 @ p["cross_0_w"]) + p["cross_0_b"] + x0
    h = np.maximum(x0 @ p["dense_0_W"] + p["dense_0_b"], 0)
    f = np.concatenate([x1, h])
    want = f @ p["dense_last_W"][:, 0] + p["dense_last_b"][0]
    rec = InteractionRecord(0, 1, 1.0, 0)
    assert forward(model, p, rec) == pytest.approx(want, rel=1e-13)
    assert extract_feature(model, p, rec).shape == (p["dense_last_W"].shape[0],)


def test_bifm_hand_trace():
    model, p = build_model(ArchDescriptor("nfm", 2, 2, 2, (2,)), 3)
    p = jitter(p, np.random.default_rng(3))
    eu, ei = p["user_emb"][1], p["item_emb"][1]
    h = np.maximum((eu * ei) @ p["dense_0_W"] + p["dense_0_b"], 0)
    want = (h @ p["dense_last_W"][:, 0] + p["dense_last_b"][0] + p["fm_bias"][0]
            + p["fm_linear"][1, 0] + p["fm_linear"][2 + 1, 0])
    assert forward(model, p, InteractionRecord(1, 1, 1.0, 0)) == pytest.approx(want, rel=1e-13)


@pytest.mark.parametrize("backbone", list(Backbone))
def test_out_of_range_ids(backbone):
    model, params = build_model(ArchDescriptor(backbone, 3, 4, 2, (2,)), 0)
    with pytest.raises(IdOutOfRange):
        forward(model, params, InteractionRecord(3, 0, 1.0, 0))
    with pytest.raises(IdOutOfRange):
        forward(model, params, InteractionRecord(0, -1, 1.0, 0))


@pytest.mark.parametrize("backbone", list(Backbone))
def test_forward_ignores_unrelated_ids(backbone):
    small, p_small = build_model(ArchDescriptor(backbone, 2, 2, 3, (3,)), 0)
    big, p_big = build_model(ArchDescriptor(backbone, 5, 6, 3, (3,)), 9)
    for g in p_small.keys():
        a = p_big[g]
        if g in ("user_emb", "item_emb"):
            a[:2] = p_small[g]
        elif g in ("wide_w", "fm_linear"):
            a[0:2] = p_small[g][0:2]
            a[5:7] = p_small[g][2:4]
        else:
            a[...] = p_small[g]
    rec = InteractionRecord(1, 1, 2.0, 0)
    assert forward(small, p_small, rec) == forward(big, p_big, rec)


# --- gradients ----------------------------------------------------------------

def _gradcheck_case(rng, backbone, head):
    arch = ArchDescriptor(backbone, 4, 5, int(rng.integers(2, 5)), (int(rng.integers(2, 6)), int(rng.integers(2, 5))),
                          head, int(rng.integers(1, 3)))
    model, params = build_model(arch, int(rng.integers(1 << 30)))
    params = jitter(params, rng, 0.3)
    u, i = int(rng.integers(4)), int(rng.integers(5))
    y = float(rng.integers(0, 2)) if head is LossKind.LOGISTIC else float(rng.uniform(1, 5))
    rec = RecordArrays([u], [i], [y], [int(y) if head is LossKind.LOGISTIC else -1], [0])
    g = per_sample_grad(model, params, rec)
    direction = ParamSet({k: rng.normal(size=a.shape) for k, a in params.items()})
    h = 1e-5
    up = dataset_loss(model, params + direction.scale(h), rec)
    dn = dataset_loss(model, params - direction.scale(h), rec)
    numeric = (up - dn) / (2 * h)
    analytic = g.dot(direction)
    return abs(analytic - numeric) / max(abs(analytic), abs(numeric), 1e-6)


def test_gradient_check_random_models():
    rng = np.random.default_rng(2024)
    errs = []
    for _ in range(40):
        for backbone in Backbone:
            for head in HEADS:
                errs.append(_gradcheck_case(rng, backbone, head))
    assert len(errs) >= 200
    assert max(errs) < 1e-5, sorted(errs)[-5:]


@pytest.mark.parametrize("backbone", list(Backbone))
def test_selected_support_is_exactly_four_keys(backbone):
    model, params = build_model(ArchDescriptor(backbone, 5, 9, 4, (4, 3)), 0)
    rec = InteractionRecord(3, 7, 4.0, 0, 1)
    g = per_sample_grad(model, params, rec, selection="selected")
    assert g.support == {("user_emb", 3), ("item_emb", 7), ("dense_last_W", WHOLE), ("dense_last_b", WHOLE)}
    full = per_sample_grad(model, params, rec, selection="full")
    for key in g.support:
        assert np.array_equal(g[key], full[key])
    assert len(full.support) > 4
