"""Reservoir and replay selection strategies."""

import enum

from .reservoir import Reservoir, reservoir_update
from .selection import (
    ScoreEntry,
    SelectionPlan,
    gdumb_select,
    icarl_distances,
    icarl_select,
    megg_select,
    mir_select,
    select_extreme,
)


class Strategy(enum.Enum):
    MEGG = "megg"
    GDUMB = "gdumb"
    ICARL = "icarl"
    MIR = "mir"
    FINETUNE = "finetune"
    FULLBATCH = "fullbatch"

    @property
    def replays(self) -> bool:
        return self not in (Strategy.FINETUNE, Strategy.FULLBATCH)


__all__ = [
    "Reservoir", "ScoreEntry", "SelectionPlan", "Strategy", "gdumb_select", "icarl_distances",
    "icarl_select", "megg_select", "mir_select", "reservoir_update", "select_extreme",
]
