"""Randomised checks of the counterfactual algebra, used by ``validate`` and the tests."""

from dataclasses import dataclass
from typing import List

import numpy as np

from ..models.backbones import ArchDescriptor, Backbone, build_model
from ..models.toys import BiasOnly, TabularMLP
from ..nn.core import batch_grad, per_sample_grads
from ..nn.losses import LossKind
from ..nn.optim import apply_mbgd
from ..nn.params import ParamSet
from ..nn.train import Optimizer, TrainConfig, train
from ..records import RecordArrays
from .oracles import one_step_loss_change_estimate, one_step_loss_change_oracle
from .steps import Divisor, counterfactual_step, mbgd_step, param_delta_closed_form
from .study import spearman, study_records

SMALL_USERS, SMALL_ITEMS = 12, 15


@dataclass
class ClosedFormCase:
    backbone: str
    head: str
    batch_size: int
    lr: float
    removed: int
    rel_error: float


def random_records(rng, n, num_users=SMALL_USERS, num_items=SMALL_ITEMS, head=LossKind.SQUARED):
    ratings = rng.uniform(1.0, 5.0, n)
    labels = rng.integers(0, 2, n) if head is LossKind.LOGISTIC else np.full(n, -1)
    return RecordArrays(rng.integers(0, num_users, n), rng.integers(0, num_items, n),
                        ratings, labels, np.arange(n))


def jitter(params: ParamSet, rng, scale=0.1) -> ParamSet:
    """Perturb every group so no bias sits at zero (away from ReLU kinks)."""
    out = params.copy()
    for name, arr in out.groups.items():
        arr += rng.normal(0.0, scale, arr.shape)
    return out


def random_small_model(rng, head=None):
    backbone = list(Backbone)[rng.integers(len(Backbone))]
    head = head or (LossKind.SQUARED if rng.random() < 0.5 else LossKind.LOGISTIC)
    arch = ArchDescriptor(backbone, SMALL_USERS, SMALL_ITEMS, int(rng.integers(2, 9)),
                          (int(rng.integers(2, 9)), int(rng.integers(2, 6))), head,
                          int(rng.integers(1, 3)))
    model, params = build_model(arch, int(rng.integers(2 ** 31)))
    return model, jitter(params, rng)


def max_rel_error(got: ParamSet, want: ParamSet) -> float:
    scale = max(float(np.max(np.abs(a))) for a in want.groups.values())
    err = max(float(np.max(np.abs(got[g] - want[g]))) for g in want.groups)
    if scale == 0.0:
        return err
    return err / scale


def closed_form_case(rng) -> ClosedFormCase:
    model, params = random_small_model(rng)
    B = int(rng.integers(2, 33))
    lr = float(10 ** rng.uniform(-4, 0))
    k = int(rng.integers(B))
    batch = random_records(rng, B, head=model.head)
    simulated = counterfactual_step(model, params, batch, k, lr, Divisor.B_MINUS_1) - mbgd_step(model, params, batch, lr)
    closed = param_delta_closed_form(model, params, batch, k, lr).to_dense(params)
    return ClosedFormCase(model.__class__.__name__, model.head.value, B, lr, k, max_rel_error(closed, simulated))


def closed_form_suite(n_cases=1000, seed=0) -> List[ClosedFormCase]:
    rng = np.random.default_rng(seed)
    return [closed_form_case(rng) for _ in range(n_cases)]


def quadratic_remainder_case(rng):
    """Bias-only squared loss: the Taylor remainder is exactly ``delta^2 / 2``.

    Returns (oracle - estimate, analytic remainder).
    """
    model = BiasOnly(LossKind.SQUARED)
    b = float(rng.normal(0.0, 2.0))
    params = model.init_params(value=b)
    B = int(rng.integers(2, 17))
    n = int(rng.integers(B, 40))
    y = rng.uniform(1.0, 5.0, n)
    D = RecordArrays(np.zeros(n, dtype=np.int64), np.zeros(n, dtype=np.int64), y, np.full(n, -1), np.arange(n))
    pos = rng.choice(n, B, replace=False)
    batch = D.take(pos)
    k = int(rng.integers(B))
    lr = float(10 ** rng.uniform(-3, 0))
    nxt = mbgd_step(model, params, batch, lr)
    oracle = one_step_loss_change_oracle(model, D, batch, k, params, lr)
    est = one_step_loss_change_estimate(model, k, batch, params, nxt, D, lr)
    g = b - batch.ratings
    delta = lr / (B - 1) * (g[k] - g.mean())
    return oracle - est, 0.5 * delta ** 2


def converged_mlp(rng, n=48, n_features=4, epochs=300):
    X = rng.normal(size=(n, n_features))
    w = rng.normal(size=n_features)
    y = (X @ w + 0.5 * rng.normal(size=n) > 0).astype(np.int64)
    model = TabularMLP(X, hidden=(int(rng.integers(3, 9)),), head=LossKind.LOGISTIC)
    params = model.init_params(rng)
    D = study_records(y)
    cfg = TrainConfig(lr=0.05, batch_size=n, epochs=epochs, optimizer=Optimizer.ADAM,
                      seed=int(rng.integers(2 ** 31)))
    return model, train(model, params, D, cfg, keep_snapshots=False).params, D


def sign_agreement_suite(n_cases=500, seed=0, cases_per_model=10, batch_size=8, lr=0.01):
    """Exact one-step changes, their estimates and GGscores on near-converged MLPs.

    Returns ``(oracle, estimate, ggscore, fraction of matching signs)``.
    """
    rng = np.random.default_rng(seed)
    oracle, estimate, scores = [], [], []
    while len(oracle) < n_cases:
        model, params, D = converged_mlp(rng)
        for _ in range(min(cases_per_model, n_cases - len(oracle))):
            batch = D.take(rng.choice(len(D), batch_size, replace=False))
            k = int(rng.integers(batch_size))
            nxt = mbgd_step(model, params, batch, lr)
            oracle.append(one_step_loss_change_oracle(model, D, batch, k, params, lr))
            estimate.append(one_step_loss_change_estimate(model, k, batch, params, nxt, D, lr))
            V = batch_grad(model, nxt, D)
            scores.append(float(per_sample_grads(model, params, batch.take([k])).dot(V)[0]))
    oracle, estimate = np.array(oracle), np.array(estimate)
    agree = float(np.mean(np.sign(oracle) == np.sign(estimate)))
    return oracle, estimate, np.array(scores), agree


def argsort_case(rng):
    """Spearman between GGscores and the divisor-B linearised one-step change within one batch."""
    model, params = random_small_model(rng)
    B = int(rng.integers(4, 33))
    batch = random_records(rng, B, head=model.head)
    D = random_records(rng, int(rng.integers(B, 80)), head=model.head)
    lr = float(10 ** rng.uniform(-3, 0))
    nxt = mbgd_step(model, params, batch, lr)
    V = batch_grad(model, nxt, D)
    scores = per_sample_grads(model, params, batch).dot(V)
    est = np.array([one_step_loss_change_estimate(model, k, batch, params, nxt, D, lr, divisor=Divisor.B)
                    for k in range(B)])
    return scores, est, spearman(scores, est)


def argsort_suite(n_instances=200, seed=0):
    rng = np.random.default_rng(seed)
    return [argsort_case(rng)[2] for _ in range(n_instances)]
