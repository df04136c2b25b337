"""Influence-guided experience replay for incrementally trained neural recommenders."""

from .records import InteractionRecord, RecordArrays

__version__ = "0.1.0"

__all__ = ["InteractionRecord", "RecordArrays", "__version__"]
