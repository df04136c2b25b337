import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import ratings_batch
from drift_replay.errors import EmptyBatch, IdOutOfRange, InvalidConfig, InvalidTarget, ShapeMismatch
from drift_replay.models import BiasOnly
from drift_replay.nn import (
    WHOLE, AdamState, LossKind, Optimizer, ParamSelection, ParamSet, SparseGrad, TrainConfig,
    apply_adam, apply_mbgd, batch_grad, dataset_loss, epoch_batches, forward, loss,
    per_sample_grad, per_sample_grads, train,
)
from drift_replay.records import InteractionRecord


# --- losses ---------------------------------------------------------------

def test_squared_loss_examples():
    assert loss(3.0, 1.0, LossKind.SQUARED) == 2.0
    assert loss(2.5, 2.5, LossKind.SQUARED) == 0.0


def test_logistic_loss_at_zero_logit():
    assert loss(0.0, 1, LossKind.LOGISTIC) == pytest.approx(math.log(2), abs=1e-12)


def test_logistic_loss_rejects_non_binary_target():
    with pytest.raises(InvalidTarget):
        loss(0.3, 0.5, LossKind.LOGISTIC)


def test_logistic_loss_stable_for_large_logits():
    assert loss(800.0, 1, LossKind.LOGISTIC) == pytest.approx(0.0, abs=1e-300)
    assert loss(-800.0, 1, LossKind.LOGISTIC) == pytest.approx(800.0)


def test_loss_kind_aliases():
    assert LossKind.parse("mse") is LossKind.SQUARED
    assert LossKind.parse("bce") is LossKind.LOGISTIC
    with pytest.raises(ValueError):
        LossKind.parse("hinge")


def test_missing_label_under_logistic_head_is_invalid():
    model = BiasOnly(LossKind.LOGISTIC)
    with pytest.raises(InvalidTarget):
        dataset_loss(model, model.init_params(), ratings_batch([3.0]))


# --- forward / gradients on the bias-only toy -------------------------------

def test_bias_only_forward():
    model = BiasOnly()
    assert forward(model, model.init_params(value=2.0), InteractionRecord(0, 0, 1.0, 0)) == 2.0
    assert forward(model, model.init_params(), InteractionRecord(0, 0, 1.0, 0)) == 0.0


def test_out_of_range_id_raises():
    model = BiasOnly()
    with pytest.raises(IdOutOfRange):
        forward(model, model.init_params(), InteractionRecord(1, 0, 1.0, 0))


def test_batch_grad_bias_only():
    model = BiasOnly()
    g = batch_grad(model, model.init_params(), ratings_batch([1.0, 3.0]))
    assert g["bias", WHOLE][0] == -2.0


def test_batch_grad_empty_raises():
    model = BiasOnly()
    with pytest.raises(EmptyBatch):
        batch_grad(model, model.init_params(), ratings_batch([]))


def test_per_sample_grad_full_bias_only():
    model = BiasOnly()
    g = per_sample_grad(model, model.init_params(), ratings_batch([1.0]), selection=ParamSelection.FULL)
    assert g["bias", WHOLE][0] == -1.0


def test_single_and_duplicate_batches_match_per_sample():
    model = BiasOnly()
    p = model.init_params(value=0.7)
    z = ratings_batch([4.0])
    one = per_sample_grad(model, p, z)
    assert batch_grad(model, p, z)["bias", WHOLE][0] == one["bias", WHOLE][0]
    assert batch_grad(model, p, ratings_batch([4.0, 4.0]))["bias", WHOLE][0] == one["bias", WHOLE][0]


# --- SparseGrad ----------------------------------------------------------

def test_sparse_add_unions_supports_and_sums_overlap():
    a = SparseGrad(whole={"b": np.array([1.0])}, rows={"E": (np.array([0, 2]), np.ones((2, 3)))})
    b = SparseGrad(rows={"E": (np.array([2, 5]), 2 * np.ones((2, 3)))})
    c = a + b
    assert c.support == {("b", WHOLE), ("E", 0), ("E", 2), ("E", 5)}
    np.testing.assert_array_equal(c["E", 2], 3 * np.ones(3))
    np.testing.assert_array_equal(c["E", 5], 2 * np.ones(3))


def test_sparse_duplicate_rows_coalesce():
    g = SparseGrad.from_rows("E", np.array([3, 1, 3]), np.array([[1.0], [2.0], [4.0]]))
    assert g.support == {("E", 1), ("E", 3)}
    assert g["E", 3][0] == 5.0


def test_sparse_dot_touches_only_support():
    dense = ParamSet({"E": np.arange(12.0).reshape(4, 3), "b": np.array([2.0])})
    g = SparseGrad(whole={"b": np.array([3.0])}, rows={"E": (np.array([1]), np.array([[1.0, 0.0, 1.0]]))})
    assert g.dot(dense) == 3.0 * 2.0 + (3.0 + 5.0)
    other = SparseGrad(rows={"E": (np.array([1, 2]), np.ones((2, 3)))})
    assert g.dot(other) == 2.0


@given(st.lists(st.tuples(st.integers(0, 6), st.floats(-5, 5)), min_size=1, max_size=12),
       st.lists(st.tuples(st.integers(0, 6), st.floats(-5, 5)), min_size=1, max_size=12))
def test_sparse_add_matches_dense_add(xs, ys):
    like = ParamSet({"E": np.zeros((7, 1))})

    def sg(pairs):
        idx = np.array([p[0] for p in pairs])
        vals = np.array([[p[1]] for p in pairs])
        return SparseGrad.from_rows("E", idx, vals)

    a, b = sg(xs), sg(ys)
    np.testing.assert_allclose((a + b).to_dense(like)["E"], a.to_dense(like)["E"] + b.to_dense(like)["E"],
                               atol=1e-12)
    assert (a + b).dot(like) == 0.0


# --- optimisers ----------------------------------------------------------

def test_mbgd_examples():
    p = ParamSet({"w": np.zeros(2)})
    g = SparseGrad(whole={"w": np.array([1.0, 2.0])})
    np.testing.assert_allclose(apply_mbgd(p, g, 0.1)["w"], [-0.1, -0.2])
    assert apply_mbgd(p, g.scale(0.0), 0.1).equal(p)
    assert apply_mbgd(p, g, 0.0).equal(p)


def test_mbgd_leaves_untouched_rows_bit_identical(rng):
    p = ParamSet({"E": rng.normal(size=(5, 3))})
    before = p["E"].copy()
    out = apply_mbgd(p, SparseGrad.from_rows("E", np.array([2]), np.ones((1, 3))), 0.5)
    for r in (0, 1, 3, 4):
        assert np.array_equal(out["E"][r], before[r])
    np.testing.assert_array_equal(out["E"][2], before[2] - 0.5)
    np.testing.assert_array_equal(p["E"], before)


def test_mbgd_shape_mismatch():
    p = ParamSet({"w": np.zeros(2)})
    with pytest.raises(ShapeMismatch):
        apply_mbgd(p, SparseGrad(whole={"w": np.ones(3)}), 0.1)


def test_adam_zero_gradient_is_fixed_point():
    p = ParamSet({"w": np.array([1.5])})
    out, state = apply_adam(p, SparseGrad(whole={"w": np.zeros(1)}), 0.001)
    assert out.equal(p)
    assert state.m["w"][0] == 0.0 and state.v["w"][0] == 0.0


@pytest.mark.parametrize("g", [3.0, -0.02, 1e-3])
def test_adam_first_step_magnitude(g):
    p = ParamSet({"w": np.array([0.0])})
    out, _ = apply_adam(p, SparseGrad(whole={"w": np.array([g])}), 0.001)
    assert abs(out["w"][0]) == pytest.approx(0.001 * abs(g) / (abs(g) + 1e-8), rel=1e-12)


def test_adam_two_step_hand_trace():
    lr, g, b1, b2, eps = 0.01, 0.5, 0.9, 0.999, 1e-8
    p = ParamSet({"w": np.array([1.0])})
    grad = SparseGrad(whole={"w": np.array([g])})
    p1, s = apply_adam(p, grad, lr)
    p2, s = apply_adam(p1, grad, lr, s)
    w, m, v = 1.0, 0.0, 0.0
    for t in (1, 2):
        m = b1 * m + (1 - b1) * g
        v = b2 * v + (1 - b2) * g * g
        w -= lr * (m / (1 - b1 ** t)) / (math.sqrt(v / (1 - b2 ** t)) + eps)
    assert p2["w"][0] == pytest.approx(w, rel=1e-14)
    assert p2["w"][0] < p1["w"][0] < 1.0


def test_adam_moments_only_on_support():
    p = ParamSet({"E": np.zeros((3, 2))})
    _, s = apply_adam(p, SparseGrad.from_rows("E", np.array([1]), np.ones((1, 2))), 0.1)
    assert not s.m["E"][0].any() and not s.m["E"][2].any()
    assert s.m["E"][1].all()


# --- training -------------------------------------------------------------

def test_train_config_validation():
    with pytest.raises(InvalidConfig):
        TrainConfig(lr=0.0)
    with pytest.raises(InvalidConfig):
        TrainConfig(batch_size=1)
    with pytest.raises(InvalidConfig):
        TrainConfig(epochs=1)


def test_epoch_batches_cover_everything_and_keep_short_batch():
    b = epoch_batches(10, 4, np.random.default_rng(0))
    assert [len(x) for x in b] == [4, 4, 2]
    assert sorted(np.concatenate(b)) == list(range(10))


def test_epoch_batches_exclude_keeps_other_batches_aligned():
    full = epoch_batches(9, 3, np.random.default_rng(5))
    cut = epoch_batches(9, 3, np.random.default_rng(5), exclude=4)
    for a, b in zip(full, cut):
        np.testing.assert_array_equal(a[a != 4], b)


@pytest.mark.parametrize("opt", list(Optimizer))
def test_training_is_bit_deterministic(opt):
    model = BiasOnly()
    data = ratings_batch(np.linspace(1, 5, 17))
    cfg = TrainConfig(lr=0.05, batch_size=4, epochs=3, optimizer=opt, seed=3)
    a = train(model, model.init_params(), data, cfg)
    b = train(model, model.init_params(), data, cfg)
    assert a.params.equal(b.params)
    assert len(a.snapshots) == 3
    assert all(x.equal(y) for x, y in zip(a.snapshots, b.snapshots))
    assert a.snapshots[-1].equal(a.params)


def test_training_does_not_mutate_initial_params():
    model = BiasOnly()
    init = model.init_params(value=0.25)
    train(model, init, ratings_batch([1.0, 2.0, 3.0]), TrainConfig(lr=0.1, batch_size=2, epochs=2))
    assert init["bias"][0] == 0.25


def test_selected_and_full_agree_on_bias_only():
    model = BiasOnly()
    p = model.init_params(value=1.0)
    data = ratings_batch([0.0, 2.0, 5.0])
    full = per_sample_grads(model, p, data, selection="full")
    sel = per_sample_grads(model, p, data, selection="selected")
    for k in range(3):
        assert full.sample(k)["bias", WHOLE][0] == sel.sample(k)["bias", WHOLE][0]
