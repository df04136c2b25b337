"""Chronological block partitioning."""

from dataclasses import dataclass
from typing import List

import numpy as np

from ..errors import TooFewRecords
from ..records import RecordArrays, as_arrays


@dataclass
class BlockSet:
    blocks: List[RecordArrays]

    @property
    def n(self) -> int:
        return len(self.blocks)

    @property
    def sizes(self) -> List[int]:
        return [len(b) for b in self.blocks]

    @property
    def boundaries(self) -> List[int]:
        """First timestamp of every block."""
        return [int(b.timestamps[0]) if len(b) else None for b in self.blocks]

    def __getitem__(self, i) -> RecordArrays:
        return self.blocks[i]

    def __len__(self):
        return len(self.blocks)

    def union(self, start: int, stop: int) -> RecordArrays:
        return RecordArrays.concat(self.blocks[start:stop])

    def corpus(self) -> RecordArrays:
        return self.union(0, self.n)


def block_sizes(total: int, n: int) -> List[int]:
    base, extra = divmod(total, n)
    return [base + 1 if k < extra else base for k in range(n)]


def split_blocks(records, n: int) -> BlockSet:
    """Stable sort by timestamp, then cut into ``n`` contiguous blocks.

    The first ``len(records) % n`` blocks take one extra record each.
    """
    arrays = as_arrays(records)
    if n < 2:
        raise ValueError("need at least 2 blocks")
    if len(arrays) < n:
        raise TooFewRecords(f"{len(arrays)} records cannot fill {n} blocks")
    arrays = arrays.take(np.argsort(arrays.timestamps, kind="stable"))
    edges = np.concatenate([[0], np.cumsum(block_sizes(len(arrays), n))])
    return BlockSet([arrays.take(np.arange(a, b)) for a, b in zip(edges[:-1], edges[1:])])
