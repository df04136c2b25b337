"""Fixed-capacity, chronologically ordered replay store."""

import numpy as np

from ..errors import CapacityExceeded
from ..records import RecordArrays, as_arrays


class Reservoir:
    def __init__(self, capacity: int, records=None):
        self.capacity = int(capacity)
        records = as_arrays(records if records is not None else [])
        if len(records) > self.capacity:
            raise CapacityExceeded(f"{len(records)} records exceed capacity {self.capacity}")
        order = np.argsort(records.timestamps, kind="stable")
        self.records: RecordArrays = records.take(order)

    def __len__(self):
        return len(self.records)

    def update(self, kept, increment) -> "Reservoir":
        return reservoir_update(kept, increment, self.capacity)


def reservoir_update(kept, increment, capacity: int) -> Reservoir:
    """Merge the retained subset with the new block, chronologically.

    Equal timestamps keep retained records first, each source in its own order.
    """
    kept = as_arrays(kept)
    increment = as_arrays(increment)
    size = len(kept) + len(increment)
    if size > capacity:
        raise CapacityExceeded(f"{size} records exceed capacity {capacity}")
    return Reservoir(capacity, RecordArrays.concat([kept, increment]))
