# src/estimators/triangle.py - Nested unbiased estimator of the triangle diagram

import logging
from functools import partial
from typing import Tuple

import numpy as np

from src.estimators.sampling import EstimateResult, run_blocks, run_metadata, summarize
from src.exceptions import UsageError
from src.graph_models import GraphModel
from src.layers import make_frame
from src.percolation import Budget, ClusterExplorer, EdgeCoins, PercConfig, sample_rng, sample_seed

logger = logging.getLogger(__name__)


def triangle_sample(model: GraphModel, config: PercConfig, budget: Budget, index: int) -> Tuple[float, bool]:
    """One outer sample: sum over x in K1 of |K2(x) & K3| with independent configurations.

    K1 and K3 are the origin's clusters in configurations w1 and w3; every x in
    K1 gets a fresh configuration w2(x). Total inner work is capped by the
    vertex budget, beyond which the partial sum is returned as truncated.
    """
    seed = sample_seed(config.master_seed, index)
    registry = model.new_registry()
    explorer = ClusterExplorer(registry, make_frame(model, 0, seed), config.probabilities, budget=budget)
    coins = EdgeCoins(sample_rng(seed))
    first = explorer.explore(0, coins)
    third = explorer.explore(0, coins.fresh())
    truncated = first.truncated or third.truncated
    targets = set(third.order)
    remaining = budget.max_vertices
    total = 0
    for x in first.order:
        if remaining <= 0:
            return float(total), True
        inner = explorer.explore(x, coins.fresh(), max_vertices=remaining)
        total += sum(1 for y in inner.order if y in targets)
        remaining -= len(inner.order)
        if inner.truncated:
            return float(total), True
    return float(total), truncated


def _triangle_block(model: GraphModel, config: PercConfig, budget: Budget, start: int, stop: int):
    rows = [triangle_sample(model, config, budget, index) for index in range(start, stop)]
    values = np.array([r[0] for r in rows], dtype=float)
    truncated = np.array([r[1] for r in rows], dtype=bool)
    return values, truncated


def estimate_triangle(
    model: GraphModel,
    config: PercConfig,
    n_outer: int,
    budget: Budget = Budget(),
    threads: int = 1,
) -> EstimateResult:
    """Unbiased Monte Carlo estimate of sum_{x,y} tau(v,x) tau(x,y) tau(y,v)"""
    if config.max_probability() >= 1.0:
        raise UsageError("Triangle estimator needs every retention probability below 1")
    blocks = run_blocks(partial(_triangle_block, model, config, budget), n_outer, threads)
    values = np.concatenate([b[0] for b in blocks])
    truncated = np.concatenate([b[1] for b in blocks])
    meta = run_metadata(model, config, budget, statistic="triangle")
    return summarize(values, truncated, config.master_seed, meta)
