"""Correlation study between one-step loss changes and retraining loss changes.

A 200-sample two-class problem and a one-hidden-layer network stand in for a
small image subset. For each epoch end the exact one-step loss change of every
sample is measured; every sample is also removed and the network retrained
from the same initialisation and shuffle stream.
"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np
from scipy import stats

from ..errors import InvalidConfig
from ..models.toys import TabularMLP
from ..nn.core import ParamSelection, batch_grad, per_sample_grads
from ..nn.losses import LossKind
from ..nn.optim import apply_mbgd
from ..nn.train import Optimizer, TrainConfig, train
from ..records import RecordArrays
from .oracles import full_batch_one_step_changes, loss_change_retrain_oracle
from .steps import Divisor

MAX_ORACLE_COST = 5_000_000   # samples * epochs * retrain steps


def pearson(x, y) -> float:
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if np.std(x) == 0 or np.std(y) == 0:
        return float("nan")
    return float(stats.pearsonr(x, y)[0])


def spearman(x, y) -> float:
    return float(stats.spearmanr(x, y)[0])


@dataclass
class StudyConfig:
    n_samples: int = 200
    n_features: int = 2
    hidden: int = 16
    epochs: int = 10
    batch_size: int = 20
    lr: float = 0.02
    separation: float = 1.0
    seed: int = 0


@dataclass
class InfluenceReport:
    """Per-sample values for the last epoch plus the full correlation picture."""

    oracle: np.ndarray                      # exact one-step change, last epoch
    estimate: np.ndarray                    # first-order estimate, last epoch
    ggscore: np.ndarray                     # GGscore at the last epoch
    retrain: np.ndarray                     # loss change from retraining
    one_step_by_epoch: np.ndarray           # (epochs, n)
    corr_with_retrain: List[float] = field(default_factory=list)
    corr_between_epochs: Optional[np.ndarray] = None
    converged: bool = True

    def summary(self) -> Dict:
        return {
            "n_samples": int(len(self.oracle)),
            "epochs": int(self.one_step_by_epoch.shape[0]),
            "pearson_last_epoch_vs_retrain": self.corr_with_retrain[-1],
            "pearson_by_epoch_vs_retrain": list(self.corr_with_retrain),
            "pearson_between_epochs": self.corr_between_epochs.tolist(),
            "pearson_oracle_vs_estimate": pearson(self.oracle, self.estimate),
            "spearman_oracle_vs_ggscore": spearman(self.oracle, self.ggscore),
            "retrain_converged": bool(self.converged),
        }


def two_class_data(n: int, n_features: int, separation: float, seed: int):
    """Two overlapping Gaussian classes, balanced."""
    rng = np.random.default_rng(seed)
    y = np.arange(n) % 2
    rng.shuffle(y)
    direction = rng.normal(size=n_features)
    direction /= np.linalg.norm(direction)
    X = rng.normal(size=(n, n_features)) + np.outer(2 * y - 1, direction) * separation / 2
    return X, y


def study_records(y) -> RecordArrays:
    n = len(y)
    return RecordArrays(np.arange(n), np.zeros(n, dtype=np.int64), y.astype(float), y, np.arange(n))


def correlation_study(cfg: StudyConfig = None) -> InfluenceReport:
    cfg = cfg or StudyConfig()
    steps = cfg.epochs * -(-cfg.n_samples // cfg.batch_size)
    if cfg.n_samples * steps > MAX_ORACLE_COST:
        raise InvalidConfig("correlation study too large for exhaustive retraining")
    X, y = two_class_data(cfg.n_samples, cfg.n_features, cfg.separation, cfg.seed)
    model = TabularMLP(X, hidden=(cfg.hidden,), head=LossKind.LOGISTIC)
    init = model.init_params(np.random.default_rng(cfg.seed + 1))
    D = study_records(y)
    tcfg = TrainConfig(lr=cfg.lr, batch_size=cfg.batch_size, epochs=cfg.epochs,
                       optimizer=Optimizer.MBGD, seed=cfg.seed + 2)
    ref = train(model, init, D, tcfg, track_loss=True)

    by_epoch = np.stack([
        full_batch_one_step_changes(model, D, snap, cfg.lr, Divisor.B_MINUS_1)
        for snap in ref.snapshots
    ])
    retrain = np.empty(cfg.n_samples)
    converged = True
    for k in range(cfg.n_samples):
        res = loss_change_retrain_oracle(model, init, D, k, tcfg, reference=ref)
        retrain[k] = res.delta
        converged &= res.converged

    theta = ref.snapshots[-1]
    n = cfg.n_samples
    ps = per_sample_grads(model, theta, D)
    theta_next = _step(theta, ps, cfg.lr)
    V = batch_grad(model, theta_next, D)
    scores = ps.dot(V)
    estimate = cfg.lr / (n - 1) * (scores - scores.mean())

    corr_ret = [pearson(row, retrain) for row in by_epoch]
    E = len(by_epoch)
    between = np.ones((E, E))
    for a in range(E):
        for b in range(a + 1, E):
            between[a, b] = between[b, a] = pearson(by_epoch[a], by_epoch[b])
    return InfluenceReport(by_epoch[-1], estimate, scores, retrain, by_epoch,
                           corr_ret, between, converged)


def _step(params, ps, lr):
    return apply_mbgd(params, ps.mean(), lr)
