"""Modulo-k orientations, factors and decompositions of small multigraphs."""

from .alpha import ResidueMap
from .decomposition import (
    DecompositionResult,
    eulerian_rule_decomposition,
    list_factor_decomposition,
    tree_plus_liftable_decomposition,
    tree_plus_trees_decomposition,
    two_tree_connected_factors,
)
from .multigraph import MultiGraph, Orientation
from .orientations import (
    BoundSpec,
    orient_mod2_bounded,
    orient_mod_k_bounded,
    orient_mod_k_search,
    verify_orientation,
)

__all__ = [
    "BoundSpec",
    "DecompositionResult",
    "MultiGraph",
    "Orientation",
    "ResidueMap",
    "eulerian_rule_decomposition",
    "list_factor_decomposition",
    "orient_mod2_bounded",
    "orient_mod_k_bounded",
    "orient_mod_k_search",
    "tree_plus_liftable_decomposition",
    "tree_plus_trees_decomposition",
    "two_tree_connected_factors",
    "verify_orientation",
]
__version__ = "0.1.0"
