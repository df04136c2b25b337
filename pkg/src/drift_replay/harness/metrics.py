"""Evaluation metrics."""

import numpy as np
from scipy.stats import rankdata

from ..errors import EmptyDataset, ShapeMismatch, UndefinedAUC


def rmse(preds, targets) -> float:
    p = np.asarray(preds, dtype=np.float64)
    t = np.asarray(targets, dtype=np.float64)
    if p.shape != t.shape:
        raise ShapeMismatch(f"{p.shape} predictions vs {t.shape} targets")
    if p.size == 0:
        raise EmptyDataset("RMSE of nothing")
    return float(np.sqrt(np.mean((p - t) ** 2)))


def auc(scores, labels) -> float:
    """Mann-Whitney AUC; tied scores count one half."""
    s = np.asarray(scores, dtype=np.float64)
    y = np.asarray(labels)
    if s.shape != y.shape:
        raise ShapeMismatch(f"{s.shape} scores vs {y.shape} labels")
    if not np.isin(y, (0, 1)).all():
        raise ValueError("labels must be 0 or 1")
    pos = y == 1
    n_pos = int(pos.sum())
    n_neg = len(y) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise UndefinedAUC("AUC needs at least one positive and one negative")
    ranks = rankdata(s)  # average ranks resolve ties as 1/2
    u = ranks[pos].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def auc_bruteforce(scores, labels) -> float:
    s = np.asarray(scores, dtype=np.float64)
    y = np.asarray(labels)
    sp, sn = s[y == 1], s[y == 0]
    if len(sp) == 0 or len(sn) == 0:
        raise UndefinedAUC("AUC needs at least one positive and one negative")
    diff = sp[:, None] - sn[None, :]
    return float(((diff > 0).sum() + 0.5 * (diff == 0).sum()) / diff.size)
