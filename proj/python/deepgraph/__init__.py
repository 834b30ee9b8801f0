"""Deep GNN training engine.

Thin wrapper over the compiled extension: graph loading, the two-circles
generator, topology statistics, and the training/diagnostic entry points.
"""

from ._core import (
    Graph,
    connected_components,
    decay_factor,
    diameter_largest_component,
    from_edges,
    gamma_weight,
    gradcheck,
    graph_stats,
    hamming_distance,
    load_canonical,
    load_citation,
    mask_features,
    node_influence,
    random_split,
    save_canonical,
    set_num_threads,
    sigma_weight,
    train,
    two_circles,
)

__all__ = [
    "Graph",
    "connected_components",
    "decay_factor",
    "diameter_largest_component",
    "from_edges",
    "gamma_weight",
    "gradcheck",
    "graph_stats",
    "hamming_distance",
    "load_canonical",
    "load_citation",
    "mask_features",
    "node_influence",
    "random_split",
    "save_canonical",
    "set_num_threads",
    "sigma_weight",
    "train",
    "two_circles",
]
