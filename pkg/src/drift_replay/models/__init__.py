"""NCF-style backbones and toy models."""

from .backbones import (
    ArchDescriptor,
    Backbone,
    BiInteractionFM,
    CrossNet,
    WideDeep,
    build_model,
    extract_feature,
    wide_deep_forward,
)
from .layers import bi_interaction, cross_layer
from .toys import BiasOnly, TabularMLP

__all__ = [
    "ArchDescriptor", "Backbone", "BiInteractionFM", "BiasOnly", "CrossNet", "TabularMLP",
    "WideDeep", "bi_interaction", "build_model", "cross_layer", "extract_feature",
    "wide_deep_forward",
]
