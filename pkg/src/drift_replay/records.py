"""Interaction records and their columnar form."""

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np


@dataclass(frozen=True)
class InteractionRecord:
    """One user-item event.

    ``rating`` feeds squared-error heads, ``label`` (0/1 or None when the
    rating falls in no class) feeds logistic heads and AUC.
    """

    user_id: int
    item_id: int
    rating: float
    timestamp: int
    label: Optional[int] = None


class RecordArrays:
    """Columnar view over a list of records, the form every kernel consumes."""

    __slots__ = ("users", "items", "ratings", "labels", "timestamps")

    def __init__(self, users, items, ratings, labels, timestamps):
        self.users = np.asarray(users, dtype=np.int64)
        self.items = np.asarray(items, dtype=np.int64)
        self.ratings = np.asarray(ratings, dtype=np.float64)
        # -1 marks "no label"
        self.labels = np.asarray(labels, dtype=np.int64)
        self.timestamps = np.asarray(timestamps, dtype=np.int64)

    @classmethod
    def from_records(cls, records: Sequence[InteractionRecord]) -> "RecordArrays":
        if isinstance(records, RecordArrays):
            return records
        n = len(records)
        users = np.fromiter((r.user_id for r in records), np.int64, n)
        items = np.fromiter((r.item_id for r in records), np.int64, n)
        ratings = np.fromiter((r.rating for r in records), np.float64, n)
        labels = np.fromiter((-1 if r.label is None else r.label for r in records), np.int64, n)
        ts = np.fromiter((r.timestamp for r in records), np.int64, n)
        return cls(users, items, ratings, labels, ts)

    def __len__(self):
        return len(self.users)

    def take(self, idx) -> "RecordArrays":
        idx = np.asarray(idx, dtype=np.int64)
        return RecordArrays(
            self.users[idx], self.items[idx], self.ratings[idx], self.labels[idx], self.timestamps[idx]
        )

    def to_records(self):
        return [
            InteractionRecord(
                int(u), int(i), float(r), int(t), None if lab < 0 else int(lab)
            )
            for u, i, r, lab, t in zip(self.users, self.items, self.ratings, self.labels, self.timestamps)
        ]

    @staticmethod
    def concat(parts) -> "RecordArrays":
        parts = [p for p in parts if len(p)]
        if not parts:
            return RecordArrays([], [], [], [], [])
        return RecordArrays(
            np.concatenate([p.users for p in parts]),
            np.concatenate([p.items for p in parts]),
            np.concatenate([p.ratings for p in parts]),
            np.concatenate([p.labels for p in parts]),
            np.concatenate([p.timestamps for p in parts]),
        )


def as_arrays(data) -> RecordArrays:
    if isinstance(data, RecordArrays):
        return data
    if isinstance(data, InteractionRecord):
        return RecordArrays.from_records([data])
    return RecordArrays.from_records(list(data))
