# src/estimators/tail.py - Cluster size and radius tails

import logging
from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple

import numpy as np

from src.estimators.sampling import EstimateResult, collect, fit_log_log_slope, run_metadata, standard_error
from src.graph_models import GraphModel
from src.percolation import Budget, ClusterSample, PercConfig

logger = logging.getLogger(__name__)

TAIL_STATISTICS = ("vertex_count", "extrinsic_radius", "intrinsic_radius")


def _tail_row(sample: ClusterSample) -> Sequence[float]:
    return (sample.vertex_count, sample.extrinsic_radius, sample.intrinsic_radius)


@dataclass
class TailTable:
    """Survival estimates P(statistic >= n) per statistic and threshold"""

    thresholds: List[int]
    results: Dict[str, List[EstimateResult]]
    gap_ratio: float
    gap_ratio_se: float
    truncation_fraction: float

    def survival(self, statistic: str = "vertex_count") -> Tuple[np.ndarray, np.ndarray]:
        rows = self.results[statistic]
        return np.array([r.mean for r in rows]), np.array([r.std_error for r in rows])

    def flat(self) -> List[EstimateResult]:
        return [r for name in TAIL_STATISTICS for r in self.results[name]]


def estimate_tail(
    model: GraphModel,
    config: PercConfig,
    thresholds: Sequence[int],
    n_samples: int,
    budget: Budget = Budget(),
    threads: int = 1,
) -> TailTable:
    """Empirical survival functions of cluster volume and radii.

    A truncated sample whose partial statistic is below a threshold may or may
    not exceed it, so each estimate carries the interval [lower, upper] where
    lower counts only observed exceedances and upper also counts every such
    truncated sample. The reported mean is the lower end.
    """
    values, truncated = collect(model, config, _tail_row, n_samples, budget=budget, threads=threads)
    fraction = float(truncated.mean())
    results: Dict[str, List[EstimateResult]] = {}
    for j, name in enumerate(TAIL_STATISTICS):
        column = values[:, j]
        rows = []
        for n in thresholds:
            hit = column >= n
            upper = hit | truncated
            meta = run_metadata(model, config, budget, statistic=f"tail_{name}", threshold=int(n))
            rows.append(
                EstimateResult(
                    mean=float(hit.mean()),
                    std_error=standard_error(hit.astype(float)),
                    n_samples=n_samples,
                    truncation_fraction=fraction,
                    seed=config.master_seed,
                    metadata=meta,
                    interval=(float(hit.mean()), float(upper.mean())),
                )
            )
        results[name] = rows
    volumes = values[:, 0]
    first, second = volumes.mean(), (volumes**2).mean()
    gap = float(second / first)
    # delta method for a ratio of means
    cov = np.cov(np.vstack([volumes, volumes**2]), ddof=1) / n_samples if n_samples > 1 else np.zeros((2, 2))
    grad = np.array([-second / first**2, 1.0 / first])
    gap_se = float(np.sqrt(max(grad @ cov @ grad, 0.0)))
    if fraction > 1e-3:
        logger.warning(f"tail: truncation fraction {fraction:.2e}; upper interval ends are loose")
    return TailTable(list(thresholds), results, gap, gap_se, fraction)


def fit_tail_exponent(
    table: TailTable, statistic: str = "vertex_count", n_range: Tuple[float, float] = (10, 1000)
) -> Tuple[float, float]:
    """Log-log slope of P(statistic >= n) over thresholds within n_range"""
    lo, hi = n_range
    survival, errors = table.survival(statistic)
    keep = [i for i, n in enumerate(table.thresholds) if lo <= n <= hi]
    if len(keep) < 2:
        logger.warning(f"tail fit needs two thresholds inside {n_range}, got {len(keep)}")
    return fit_log_log_slope(
        [table.thresholds[i] for i in keep], survival[keep], errors[keep]
    )
