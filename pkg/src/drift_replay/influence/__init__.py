"""Counterfactual updates, loss-change oracles, the first-order estimate and GGscores."""

from .oracles import (
    RetrainResult,
    full_batch_one_step_changes,
    loss_change_retrain_oracle,
    one_step_loss_change_estimate,
    one_step_loss_change_oracle,
)
from .scores import ggscore, ggscore_batch, reference_vector, worker_count
from .steps import (
    Divisor,
    closed_form_delta,
    counterfactual_step,
    mbgd_step,
    param_delta_closed_form,
)
from .study import InfluenceReport, StudyConfig, correlation_study, pearson, spearman

__all__ = [
    "Divisor", "InfluenceReport", "RetrainResult", "StudyConfig", "closed_form_delta",
    "correlation_study", "counterfactual_step", "full_batch_one_step_changes", "ggscore",
    "ggscore_batch", "loss_change_retrain_oracle", "mbgd_step", "one_step_loss_change_estimate",
    "one_step_loss_change_oracle", "param_delta_closed_form", "pearson", "reference_vector",
    "spearman", "worker_count",
]
