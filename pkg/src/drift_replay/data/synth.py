"""Latent-factor interaction world whose user tastes drift over time."""

from dataclasses import dataclass

import numpy as np

from ..errors import InvalidConfig
from ..records import RecordArrays
from .labels import LabelRule

RATING_MIN, RATING_MAX = 1.0, 5.0


@dataclass(frozen=True)
class SynthConfig:
    num_users: int = 300
    num_items: int = 500
    num_records: int = 30000
    latent_dim: int = 8
    # fraction of each user's latent vector replaced per phase, in [0, 1]
    drift: float = 0.5
    phases: int = 5
    noise: float = 0.3
    signal: float = 1.0
    mean_rating: float = 3.5
    user_bias: float = 0.3
    item_bias: float = 0.5
    # Zipf-like exponent for item popularity
    popularity: float = 0.8
    start_time: int = 1_000_000_000
    mean_gap: int = 30
    label_rule: str = "movielens"

    def __post_init__(self):
        if min(self.num_users, self.num_items, self.num_records, self.latent_dim, self.phases) < 1:
            raise InvalidConfig("sizes, latent_dim and phases must be positive")
        if not 0.0 <= self.drift <= 1.0:
            raise InvalidConfig("drift must lie in [0, 1]")
        if self.noise < 0 or self.mean_gap < 1:
            raise InvalidConfig("noise must be >= 0 and mean_gap >= 1")


def _labels(ratings, rule):
    # vectorised binarize; in-between ratings get no label
    pos = 4.0 if LabelRule.parse(rule) is LabelRule.MOVIELENS else 3.0
    lab = np.full(len(ratings), -1, dtype=np.int64)
    lab[ratings <= 2.0] = 0
    lab[ratings >= pos] = 1
    return lab


def synth_drift(config: SynthConfig = SynthConfig(), seed: int = 0) -> RecordArrays:
    """Generate a chronologically ordered corpus.

    rating = clip(mean + b_u + b_i + signal * p_u(phase) . q_i + noise, 1, 5),
    where each phase keeps ``sqrt(1 - drift^2)`` of every user vector and adds
    ``drift`` times a fresh draw, so the variance of p_u stays constant.
    """
    cfg = config
    rng = np.random.default_rng(seed)
    k = cfg.latent_dim
    scale = 1.0 / np.sqrt(np.sqrt(k))
    # p.q then has unit variance before the signal factor
    P = rng.normal(0.0, scale, (cfg.num_users, k))
    Q = rng.normal(0.0, scale, (cfg.num_items, k))
    bu = rng.normal(0.0, cfg.user_bias, cfg.num_users)
    bi = rng.normal(0.0, cfg.item_bias, cfg.num_items)
    keep = np.sqrt(1.0 - cfg.drift ** 2)
    phase_P = [P]
    for _ in range(cfg.phases - 1):
        P = keep * P + cfg.drift * rng.normal(0.0, scale, P.shape)
        phase_P.append(P)

    n = cfg.num_records
    pop = 1.0 / np.arange(1, cfg.num_items + 1) ** cfg.popularity
    item_order = rng.permutation(cfg.num_items)
    users = rng.integers(0, cfg.num_users, n)
    items = item_order[rng.choice(cfg.num_items, size=n, p=pop / pop.sum())]
    phase = np.minimum(np.arange(n) * cfg.phases // n, cfg.phases - 1)
    dots = np.empty(n)
    for p in range(cfg.phases):
        m = phase == p
        dots[m] = np.einsum("nk,nk->n", phase_P[p][users[m]], Q[items[m]])
    ratings = cfg.mean_rating + bu[users] + bi[items] + cfg.signal * dots + rng.normal(0.0, cfg.noise, n)
    ratings = np.clip(ratings, RATING_MIN, RATING_MAX)
    gaps = rng.integers(1, 2 * cfg.mean_gap, n)
    ts = cfg.start_time + np.cumsum(gaps)
    return RecordArrays(users, items, ratings, _labels(ratings, cfg.label_rule), ts)
