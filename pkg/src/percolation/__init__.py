"""Bernoulli bond percolation on lazily grown graphs"""

from src.percolation.explorer import (
    Budget,
    ClusterExplorer,
    ClusterSample,
    ExplorationTrace,
    PercConfig,
    TruncationReason,
    explore_cluster,
    explore_coupled,
    explore_slab_ladder,
)
from src.percolation.streams import COIN_STREAM, EdgeCoins, sample_rng, sample_seed

__all__ = [
    "Budget",
    "COIN_STREAM",
    "ClusterExplorer",
    "ClusterSample",
    "EdgeCoins",
    "ExplorationTrace",
    "PercConfig",
    "TruncationReason",
    "explore_cluster",
    "explore_coupled",
    "explore_slab_ladder",
    "sample_rng",
    "sample_seed",
]
