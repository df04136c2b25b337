"""Ingestion, labeling, block splitting and synthetic corpora."""

from .blocks import BlockSet, block_sizes, split_blocks
from .labels import LabelRule, binarize, frequency_ratings, playcount_rating
from .loaders import CSV_HEADER, IdMap, LoadResult, load_csv, load_movielens
from .synth import SynthConfig, synth_drift

__all__ = [
    "BlockSet", "CSV_HEADER", "IdMap", "LabelRule", "LoadResult", "SynthConfig", "binarize",
    "block_sizes", "frequency_ratings", "load_csv", "load_movielens", "playcount_rating",
    "split_blocks", "synth_drift",
]
