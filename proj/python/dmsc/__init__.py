"""Deep multi-view semi-supervised clustering engine."""

from ._core import (
    Branch,
    ConfigError,
    DivergenceError,
    ParseError,
    acc,
    ari,
    clustering_loss,
    constraint_loss,
    default_layer_spec,
    finetune,
    generate_constraints,
    kmeans,
    make_blobs,
    make_branch,
    nmi,
    pretrain,
    pseudo_labels,
    rescale_view,
    soft_assignment,
    target_distribution,
    view_weights,
)

__all__ = [
    "Branch",
    "ConfigError",
    "DivergenceError",
    "ParseError",
    "acc",
    "ari",
    "clustering_loss",
    "constraint_loss",
    "default_layer_spec",
    "finetune",
    "generate_constraints",
    "kmeans",
    "make_blobs",
    "make_branch",
    "nmi",
    "pretrain",
    "pseudo_labels",
    "rescale_view",
    "soft_assignment",
    "target_distribution",
    "view_weights",
]
