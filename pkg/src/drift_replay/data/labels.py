"""Rating to label rules."""

import enum
from collections import defaultdict
from typing import Optional

from ..errors import InvalidRating
from ..records import InteractionRecord


class LabelRule(enum.Enum):
    # 1,2 -> 0; 4,5 -> 1; 3 -> no label
    MOVIELENS = "movielens"
    # 1,2 -> 0; 3,4 -> 1
    TAOBAO = "taobao"

    @classmethod
    def parse(cls, value) -> "LabelRule":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            raise ValueError(f"unknown label rule {value!r}") from None


_DOMAIN = {LabelRule.MOVIELENS: (1.0, 5.0), LabelRule.TAOBAO: (1.0, 4.0)}


def binarize(rating: float, rule=LabelRule.MOVIELENS) -> Optional[int]:
    """Binary label for a rating, or None when it falls in neither class.

    Non-integer ratings are thresholded: at most 2 is negative, at least 4
    (MovieLens) or 3 (Taobao) is positive.
    """
    rule = LabelRule.parse(rule)
    lo, hi = _DOMAIN[rule]
    r = float(rating)
    if not lo <= r <= hi:
        raise InvalidRating(f"rating {rating!r} outside [{lo:g}, {hi:g}] for rule {rule.value}")
    if r <= 2.0:
        return 0
    pos = 4.0 if rule is LabelRule.MOVIELENS else 3.0
    return 1 if r >= pos else None


def playcount_rating(count: int) -> int:
    """Listen-count buckets: 30+ -> 5, 15-29 -> 4, 5-14 -> 3, 1-4 -> 2."""
    if count < 1:
        raise InvalidRating("play counts below 1 are not observable in a log")
    if count >= 30:
        return 5
    if count >= 15:
        return 4
    if count >= 5:
        return 3
    return 2


def frequency_ratings(events, rule=LabelRule.MOVIELENS):
    """Collapse listen events into one rated record per (user, item).

    ``events`` are (user_id, item_id, timestamp) triples. Each pair is
    stamped with its latest listen, when the count is final.
    """
    count = defaultdict(int)
    last = {}
    for u, i, t in events:
        key = (int(u), int(i))
        count[key] += 1
        last[key] = max(last.get(key, t), t)
    out = []
    for key in sorted(count, key=lambda k: (last[k], k)):
        r = float(playcount_rating(count[key]))
        out.append(InteractionRecord(key[0], key[1], r, int(last[key]), binarize(r, rule)))
    return out
