# src/estimators/susceptibility.py - Tilted susceptibility, magnetization and truncated susceptibility

import logging
from dataclasses import dataclass, field
from functools import partial
from typing import Any, Dict, Optional, Sequence

import numpy as np

from src.estimators.sampling import EstimateResult, collect, run_metadata, summarize
from src.exceptions import UsageError
from src.graph_models import GraphModel
from src.percolation import Budget, ClusterSample, PercConfig

logger = logging.getLogger(__name__)


def _tilted_volume(lam: float, sample: ClusterSample) -> Sequence[float]:
    return (sample.tilted_volume(lam),)


@dataclass
class VolumeDraw:
    """Tilted cluster volumes |K|_lambda of independent samples"""

    volumes: np.ndarray
    truncated: np.ndarray
    seed: int
    lam: float
    metadata: Dict[str, Any] = field(default_factory=dict)


def draw_tilted_volumes(
    model: GraphModel,
    config: PercConfig,
    lam: float,
    n_samples: int,
    budget: Budget = Budget(),
    threads: int = 1,
) -> VolumeDraw:
    values, truncated = collect(
        model, config, partial(_tilted_volume, lam), n_samples, budget=budget, threads=threads
    )
    meta = run_metadata(model, config, budget, **{"lambda": lam})
    return VolumeDraw(values[:, 0], truncated, config.master_seed, lam, meta)


def estimate_chi(
    model: GraphModel,
    config: PercConfig,
    lam: float,
    n_samples: int,
    budget: Budget = Budget(),
    threads: int = 1,
    draw: Optional[VolumeDraw] = None,
) -> EstimateResult:
    """Mean tilted volume E[sum over K of Delta(origin, x)^lambda].

    Truncated clusters enter with their partial volume, so the estimate is a
    lower bound whenever truncation_fraction > 0.
    """
    draw = draw or draw_tilted_volumes(model, config, lam, n_samples, budget, threads)
    return summarize(draw.volumes, draw.truncated, draw.seed, {**draw.metadata, "statistic": "chi"})


def estimate_magnetization(
    model: GraphModel,
    config: PercConfig,
    lam: float,
    h: float,
    n_samples: int,
    budget: Budget = Budget(),
    threads: int = 1,
    draw: Optional[VolumeDraw] = None,
) -> EstimateResult:
    """M = E[1 - exp(-h |K|_lambda)]; the bias from truncation is at most truncation_fraction"""
    if h < 0:
        raise UsageError(f"Ghost field h must be nonnegative, got {h}")
    draw = draw or draw_tilted_volumes(model, config, lam, n_samples, budget, threads)
    values = -np.expm1(-h * draw.volumes)
    meta = {**draw.metadata, "statistic": "magnetization", "h": h}
    # integrand is bounded by one, so truncation costs at most its fraction
    return summarize(values, draw.truncated, draw.seed, meta, warn=False)


def estimate_truncated_susceptibility(
    model: GraphModel,
    config: PercConfig,
    lam: float,
    h: float,
    n_samples: int,
    budget: Budget = Budget(),
    threads: int = 1,
    draw: Optional[VolumeDraw] = None,
) -> EstimateResult:
    """chi_h = E[|K|_lambda exp(-h |K|_lambda)], the h-derivative of the magnetization"""
    if h < 0:
        raise UsageError(f"Ghost field h must be nonnegative, got {h}")
    draw = draw or draw_tilted_volumes(model, config, lam, n_samples, budget, threads)
    values = draw.volumes * np.exp(-h * draw.volumes)
    meta = {**draw.metadata, "statistic": "truncated_susceptibility", "h": h}
    return summarize(values, draw.truncated, draw.seed, meta, warn=h == 0.0)
