import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import ratings_batch
from drift_replay.errors import EmptyBatch, EmptyDataset, InvalidConfig, NotInBatch, ScoringError
from drift_replay.influence import (
    Divisor, StudyConfig, closed_form_delta, correlation_study, counterfactual_step,
    full_batch_one_step_changes, ggscore, ggscore_batch, loss_change_retrain_oracle, mbgd_step,
    one_step_loss_change_estimate, one_step_loss_change_oracle, param_delta_closed_form, pearson,
    reference_vector, spearman,
)
from drift_replay.influence import validation
from drift_replay.influence.study import study_records
from drift_replay.models import ArchDescriptor, BiasOnly, TabularMLP, build_model
from drift_replay.nn import WHOLE, Optimizer, ParamSet, SparseGrad, TrainConfig, per_sample_grad
from drift_replay.records import InteractionRecord, RecordArrays

TOY = BiasOnly()


def bias(v):
    return TOY.init_params(value=v)


# --- steps ---------------------------------------------------------------

def test_mbgd_step_bias_only():
    assert mbgd_step(TOY, bias(0), ratings_batch([1, 3]), 0.5)["bias"][0] == 1.0
    assert mbgd_step(TOY, bias(0.3), ratings_batch([1, 3]), 0.0)["bias"][0] == 0.3


def test_mbgd_step_duplicate_batch():
    assert mbgd_step(TOY, bias(0), ratings_batch([2, 2]), 0.5)["bias"][0] == 1.0


def test_mbgd_step_empty():
    with pytest.raises(EmptyBatch):
        mbgd_step(TOY, bias(0), ratings_batch([]), 0.5)


def test_counterfactual_step_examples():
    batch = ratings_batch([1, 3])
    assert counterfactual_step(TOY, bias(0), batch, 0, 0.5, Divisor.B_MINUS_1)["bias"][0] == 1.5
    assert counterfactual_step(TOY, bias(0), batch, 0, 0.5, Divisor.B)["bias"][0] == 0.75


def test_counterfactual_step_by_record_and_duplicates():
    recs = [InteractionRecord(0, 0, 2.0, 5), InteractionRecord(0, 0, 2.0, 5)]
    out = counterfactual_step(TOY, bias(0), recs, recs[0], 0.5)
    assert out["bias"][0] == 1.0


def test_counterfactual_step_not_in_batch():
    recs = [InteractionRecord(0, 0, 2.0, 5), InteractionRecord(0, 0, 1.0, 6)]
    with pytest.raises(NotInBatch):
        counterfactual_step(TOY, bias(0), recs, InteractionRecord(0, 0, 9.0, 1), 0.5)
    with pytest.raises(NotInBatch):
        counterfactual_step(TOY, bias(0), recs, 2, 0.5)


def test_divisor_parse():
    assert Divisor.parse("B-1") is Divisor.B_MINUS_1
    assert Divisor.parse("b") is Divisor.B
    with pytest.raises(ValueError):
        Divisor.parse("2B")


def test_closed_form_two_param_toy():
    g1 = SparseGrad(whole={"w": np.array([1.0, 0.0])})
    g2 = SparseGrad(whole={"w": np.array([0.0, 2.0])})
    mean = (g1 + g2).scale(0.5)
    delta = closed_form_delta(g1, mean, 0.1, 2)
    np.testing.assert_allclose(delta["w", WHOLE], [0.05, -0.1], rtol=1e-15)
    # direct simulation of both updates from theta = 0
    regular = -0.1 * (np.array([1.0, 0.0]) + np.array([0.0, 2.0])) / 2
    counterfactual = -0.1 * np.array([0.0, 2.0]) / 1
    np.testing.assert_allclose(counterfactual - regular, [0.05, -0.1], rtol=1e-15)


def test_closed_form_zero_when_removed_is_mean():
    d = param_delta_closed_form(TOY, bias(0), ratings_batch([1, 2, 3]), 1, 0.3)
    assert d["bias", WHOLE][0] == 0.0


def test_closed_form_linear_in_lr():
    batch = ratings_batch([1, 2, 7])
    a = param_delta_closed_form(TOY, bias(0.5), batch, 2, 0.1)["bias", WHOLE][0]
    b = param_delta_closed_form(TOY, bias(0.5), batch, 2, 0.3)["bias", WHOLE][0]
    assert b == pytest.approx(3 * a, rel=1e-14)


@given(st.integers(0, 2 ** 31 - 1))
def test_closed_form_matches_simulation(seed):
    assert validation.closed_form_case(np.random.default_rng(seed)).rel_error <= 1e-9


# --- oracles and estimate -------------------------------------------------

def test_one_step_oracle_hand_example():
    D = ratings_batch([1, 3])
    val = one_step_loss_change_oracle(TOY, D, D, 0, bias(0), 0.5)
    assert val == pytest.approx(-0.375, abs=1e-15)


def test_one_step_oracle_degenerate_cases():
    D = ratings_batch([1, 2, 3])
    assert one_step_loss_change_oracle(TOY, D, D, 1, bias(0), 0.5) == 0.0
    assert one_step_loss_change_oracle(TOY, D, D, 0, bias(0), 0.0) == 0.0
    with pytest.raises(EmptyDataset):
        one_step_loss_change_oracle(TOY, ratings_batch([]), D, 0, bias(0), 0.5)


def test_estimate_hand_example():
    D = ratings_batch([1, 3])
    nxt = mbgd_step(TOY, bias(0), D, 0.5)
    assert nxt["bias"][0] == 1.0
    assert one_step_loss_change_estimate(TOY, 0, D, bias(0), nxt, D, 0.5) == pytest.approx(-0.5, abs=1e-15)


def test_estimate_vanishes_at_stationary_point_and_for_mean_sample():
    D = ratings_batch([1, 3])
    assert one_step_loss_change_estimate(TOY, 0, D, bias(0), bias(2.0), D, 0.5) == 0.0
    batch = ratings_batch([1, 2, 3])
    nxt = mbgd_step(TOY, bias(0), batch, 0.5)
    assert one_step_loss_change_estimate(TOY, 1, batch, bias(0), nxt, D, 0.5) == 0.0


def test_estimate_remainder_is_analytic_on_quadratic():
    rng = np.random.default_rng(7)
    for _ in range(50):
        gap, remainder = validation.quadratic_remainder_case(rng)
        assert gap == pytest.approx(remainder, abs=1e-9)


def test_full_batch_one_step_changes_match_loop(rng):
    X = rng.normal(size=(12, 3))
    y = (X[:, 0] > 0).astype(int)
    model = TabularMLP(X, hidden=(4,))
    params = model.init_params(rng)
    D = study_records(y)
    vec = full_batch_one_step_changes(model, D, params, 0.2)
    loop = [one_step_loss_change_oracle(model, D, D, k, params, 0.2) for k in range(len(D))]
    np.testing.assert_allclose(vec, loop, rtol=1e-9, atol=1e-15)


def test_retrain_oracle_two_points():
    D = ratings_batch([1, 3])
    cfg = TrainConfig(lr=0.5, batch_size=2, epochs=200, optimizer=Optimizer.MBGD)
    res = loss_change_retrain_oracle(TOY, bias(0), D, 1, cfg)
    assert res.delta == pytest.approx(0.5, abs=1e-9)
    assert res.converged


def test_retrain_oracle_duplicate_at_mean_is_zero():
    D = ratings_batch([1, 2, 2, 3])
    cfg = TrainConfig(lr=0.5, batch_size=4, epochs=200, optimizer=Optimizer.MBGD)
    assert abs(loss_change_retrain_oracle(TOY, bias(0), D, 2, cfg).delta) < 1e-6


def test_retrain_oracle_flags_nonconvergence():
    D = ratings_batch([1, 30])
    cfg = TrainConfig(lr=0.001, batch_size=2, epochs=2, optimizer=Optimizer.MBGD)
    assert not loss_change_retrain_oracle(TOY, bias(0), D, 1, cfg).converged


def test_retrain_oracle_singleton():
    with pytest.raises(EmptyDataset):
        loss_change_retrain_oracle(TOY, bias(0), ratings_batch([1]), 0, TrainConfig())


# --- reference vector and GGscores ----------------------------------------

def test_reference_vector_examples():
    D = ratings_batch([1, 3])
    assert reference_vector(TOY, D, bias(1.0))["bias", WHOLE][0] == -1.0
    assert reference_vector(TOY, D, bias(2.0))["bias", WHOLE][0] == 0.0
    z = ratings_batch([4])
    assert reference_vector(TOY, z, bias(1.0))["bias", WHOLE][0] == per_sample_grad(TOY, bias(1.0), z)["bias", WHOLE][0]
    with pytest.raises(EmptyDataset):
        reference_vector(TOY, ratings_batch([]), bias(0))


def test_ggscore_examples():
    V = SparseGrad(whole={"bias": np.array([-1.0])})
    assert ggscore(TOY, ratings_batch([1]), bias(0), V) == 1.0
    assert ggscore(TOY, ratings_batch([1]), bias(0), V.scale(0.0)) == 0.0
    assert ggscore(TOY, ratings_batch([2]), bias(2.0), V) == 0.0


def test_ggscore_batch_order_and_symmetry():
    V = SparseGrad(whole={"bias": np.array([0.5])})
    s = ggscore_batch(TOY, ratings_batch([1, 1, 1]), bias(0), V)
    assert s.tolist() == [s[0]] * 3
    assert len(ggscore_batch(TOY, ratings_batch([4]), bias(0), V)) == 1
    np.testing.assert_array_equal(ggscore_batch(TOY, ratings_batch([1, 3]), bias(0), V), [-0.5, -1.5])


def test_ggscore_batch_reports_failing_index():
    model, params = build_model(ArchDescriptor("wdl", 3, 3, 2, (2,)), 0)
    D = RecordArrays([0, 1, 2, 7, 0], [0, 1, 2, 0, 1], [1.0] * 5, [-1] * 5, range(5))
    V = reference_vector(model, D.take([0, 1]), params)
    with pytest.raises(ScoringError) as info:
        ggscore_batch(model, D, params, V, chunk=2)
    assert info.value.index == 3


def test_ggscore_batch_threads_match_serial(monkeypatch):
    model, params = build_model(ArchDescriptor("dcn", 20, 30, 4, (4,)), 0)
    rng = np.random.default_rng(0)
    D = validation.random_records(rng, 500, 20, 30)
    V = reference_vector(model, D, params)
    serial = ggscore_batch(model, D, params, V, chunk=64, threads=1)
    monkeypatch.setenv("DRIFT_REPLAY_THREADS", "4")
    threaded = ggscore_batch(model, D, params, V, chunk=64)
    np.testing.assert_array_equal(serial, threaded)


def test_ggscore_two_sample_order_matches_divisor_b_change():
    D = ratings_batch([1, 4])
    nxt = mbgd_step(TOY, bias(0), D, 0.3)
    V = reference_vector(TOY, D, nxt, selection="full")
    s = ggscore_batch(TOY, D, bias(0), V, selection="full")
    est = [one_step_loss_change_estimate(TOY, k, D, bias(0), nxt, D, 0.3, divisor="b") for k in range(2)]
    assert np.argsort(s).tolist() == np.argsort(est).tolist()


@given(st.integers(0, 2 ** 31 - 1), st.floats(0.01, 100))
def test_scaling_reference_preserves_ranking(seed, c):
    rng = np.random.default_rng(seed)
    model, params = validation.random_small_model(rng)
    D = validation.random_records(rng, 20, head=model.head)
    V = reference_vector(model, D, params)
    a = ggscore_batch(model, D, params, V)
    b = ggscore_batch(model, D, params, V.scale(c))
    assert spearman(a, b) == pytest.approx(1.0, abs=1e-12) or np.ptp(a) == 0


@pytest.mark.parametrize("seed", range(5))
def test_selected_and_full_ggscores_agree_on_selected_reference(seed):
    rng = np.random.default_rng(seed)
    model, params = validation.random_small_model(rng)
    D = validation.random_records(rng, 30, head=model.head)
    V = reference_vector(model, D, params, selection="selected")
    sel = ggscore_batch(model, D, params, V, selection="selected")
    full = ggscore_batch(model, D, params, V, selection="full")
    np.testing.assert_allclose(sel, full, rtol=1e-12, atol=1e-15)


# --- correlation helpers ----------------------------------------------------

def test_pearson_examples():
    assert pearson([1, 2, 3], [2, 4, 6]) == pytest.approx(1.0)
    assert pearson([1, 2, 3], [6, 4, 2]) == pytest.approx(-1.0)


def test_correlation_study_guard():
    with pytest.raises(InvalidConfig):
        correlation_study(StudyConfig(n_samples=5000, batch_size=2, epochs=50))


def test_small_correlation_study_shapes():
    rep = correlation_study(StudyConfig(n_samples=40, epochs=3, batch_size=10))
    assert rep.one_step_by_epoch.shape == (3, 40)
    assert len(rep.oracle) == len(rep.estimate) == len(rep.ggscore) == len(rep.retrain) == 40
    assert rep.corr_between_epochs.shape == (3, 3)
    assert set(rep.summary()) >= {"pearson_last_epoch_vs_retrain", "pearson_by_epoch_vs_retrain"}
