"""Subset selection rules for the replay reservoir."""

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from ..errors import EmptyIncrement, KTooLarge
from ..influence.scores import ggscore_batch, reference_vector
from ..influence.steps import mbgd_step
from ..nn.core import ParamSelection
from ..nn.losses import losses, targets_for
from ..records import as_arrays


@dataclass(frozen=True)
class ScoreEntry:
    index: int
    score: float


@dataclass(frozen=True)
class SelectionPlan:
    K: int

    @property
    def k_left(self) -> int:
        return self.K // 2

    @property
    def k_right(self) -> int:
        return self.K - self.K // 2

    @classmethod
    def default(cls, capacity: int, increment: int) -> "SelectionPlan":
        return cls(max(capacity - increment, 0))

    @classmethod
    def from_ratio(cls, ratio: float, capacity: int) -> "SelectionPlan":
        if not 0.0 <= ratio <= 1.0:
            raise ValueError("replay ratio must lie in [0, 1]")
        # round half up, not to even
        return cls(int(math.floor(ratio * capacity + 0.5)))


def _scores_array(scores) -> np.ndarray:
    if len(scores) and isinstance(scores[0], ScoreEntry):
        ordered = sorted(scores, key=lambda e: e.index)
        return np.array([e.score for e in ordered], dtype=np.float64)
    return np.asarray(scores, dtype=np.float64)


def select_extreme(scores, K: int) -> np.ndarray:
    """Keep the ``floor(K/2)`` lowest and ``ceil(K/2)`` highest scores.

    Ties are ordered by original index (stable sort), so among equal scores
    the left end takes the lowest indices and the right end the highest.
    Returns the kept indices in increasing order.
    """
    s = _scores_array(scores)
    n = len(s)
    if K < 0:
        raise ValueError("K must be non-negative")
    if K > n:
        raise KTooLarge(f"cannot keep {K} of {n} samples")
    plan = SelectionPlan(K)
    order = np.argsort(s, kind="stable")
    keep = np.concatenate([order[:plan.k_left], order[n - plan.k_right:]])
    return np.sort(keep)


def megg_select(model, D, theta_prime, theta_hat=None, K: int = 0, kind=None,
                selection=ParamSelection.SELECTED, V=None, reference_data=None):
    """Replay subset with the most extreme GGscores.

    Scores every record of ``D`` at ``theta_prime`` against the reference
    gradient ``V`` (by default the mean gradient over ``reference_data``,
    itself defaulting to ``D``, at ``theta_hat``). Returns ``(kept indices, scores)``.
    """
    arrays = as_arrays(D)
    if K > len(arrays):
        raise KTooLarge(f"cannot keep {K} of {len(arrays)} samples")
    if V is None:
        ref = arrays if reference_data is None else as_arrays(reference_data)
        V = reference_vector(model, ref, theta_hat, kind, selection)
    scores = ggscore_batch(model, arrays, theta_prime, V, kind, selection)
    return select_extreme(scores, K), scores


def gdumb_select(D, K: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform sample of ``K`` indices without replacement."""
    n = len(D)
    if K > n:
        raise KTooLarge(f"cannot keep {K} of {n} samples")
    return np.sort(rng.choice(n, size=K, replace=False))


def icarl_select(model, D, K: int, params) -> np.ndarray:
    """The ``K`` records whose final-layer input lies closest to the mean feature."""
    arrays = as_arrays(D)
    n = len(arrays)
    if K > n:
        raise KTooLarge(f"cannot keep {K} of {n} samples")
    if K == 0:
        return np.zeros(0, dtype=np.int64)
    feats = model.features(params, arrays.users, arrays.items)
    center = feats.mean(axis=0)
    dist = np.linalg.norm(feats - center, axis=1)
    return np.sort(np.argsort(dist, kind="stable")[:K])


def icarl_distances(feats) -> np.ndarray:
    feats = np.asarray(feats, dtype=np.float64)
    return np.linalg.norm(feats - feats.mean(axis=0), axis=1)


def mir_select(model, D, K: int, params, increment, lr: float, kind=None):
    """Records whose loss rises most under a foreseen update.

    The foreseen parameters take one mean-gradient descent step over the
    whole incoming block. Returns ``(kept indices, loss increases)``.
    """
    arrays = as_arrays(D)
    inc = as_arrays(increment)
    n = len(arrays)
    if K > n:
        raise KTooLarge(f"cannot keep {K} of {n} samples")
    if len(inc) == 0:
        raise EmptyIncrement("MIR needs a non-empty incoming block")
    kind = kind or model.head
    foreseen = mbgd_step(model, params, inc, lr, kind)
    y = targets_for(arrays, kind)
    delta = losses(model.predict(foreseen, arrays), y, kind) - losses(model.predict(params, arrays), y, kind)
    return np.sort(np.argsort(-delta, kind="stable")[:K]), delta
