# src/estimators/sampling.py - Deterministic sample fan-out, result records and rate fits

import logging
import math
from dataclasses import asdict, dataclass, field
from functools import partial
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from joblib import Parallel, cpu_count, delayed

from src.exceptions import UsageError
from src.graph_models import GraphModel
from src.layers import UNBOUNDED, SlabSpec
from src.percolation import Budget, ClusterSample, PercConfig, explore_cluster, explore_slab_ladder

logger = logging.getLogger(__name__)

# samples per block; block boundaries never depend on the thread count
DEFAULT_BLOCK = 256
TRUNCATION_WARN = 1e-3

Statistic = Callable[[ClusterSample], Sequence[float]]


def resolve_threads(threads: Optional[int]) -> int:
    """0 or None means one worker per core"""
    if not threads or threads < 1:
        return max(1, cpu_count())
    return threads


def run_blocks(
    block_task: Callable[[int, int], Any],
    n_samples: int,
    threads: int = 1,
    block_size: int = DEFAULT_BLOCK,
) -> List[Any]:
    """Run block_task(start, stop) over fixed blocks of sample indices, results in index order"""
    bounds = [(start, min(start + block_size, n_samples)) for start in range(0, n_samples, block_size)]
    n_jobs = resolve_threads(threads)
    if n_jobs == 1 or len(bounds) <= 1:
        return [block_task(start, stop) for start, stop in bounds]
    logger.debug(f"Dispatching {len(bounds)} blocks to {n_jobs} workers")
    return Parallel(n_jobs=n_jobs)(delayed(block_task)(start, stop) for start, stop in bounds)


def _cluster_block(
    model: GraphModel,
    config: PercConfig,
    slab: SlabSpec,
    budget: Budget,
    statistic: Statistic,
    start: int,
    stop: int,
) -> Tuple[np.ndarray, np.ndarray]:
    rows = []
    truncated = np.zeros(stop - start, dtype=bool)
    for i, index in enumerate(range(start, stop)):
        sample = explore_cluster(model, None, config, slab, budget, index)
        rows.append(statistic(sample))
        truncated[i] = sample.truncated
    return np.asarray(rows, dtype=float).reshape(stop - start, -1), truncated


def collect(
    model: GraphModel,
    config: PercConfig,
    statistic: Statistic,
    n_samples: int,
    slab: SlabSpec = UNBOUNDED,
    budget: Budget = Budget(),
    threads: int = 1,
    block_size: int = DEFAULT_BLOCK,
) -> Tuple[np.ndarray, np.ndarray]:
    """Per-sample statistic rows (n_samples x width) and truncation flags.

    Each sample is explored from its own seed stream, so the returned arrays
    are identical for any thread count.
    """
    if n_samples < 1:
        raise UsageError(f"n_samples must be positive, got {n_samples}")
    task = partial(_cluster_block, model, config, slab, budget, statistic)
    blocks = run_blocks(task, n_samples, threads, block_size)
    values = np.concatenate([b[0] for b in blocks], axis=0)
    truncated = np.concatenate([b[1] for b in blocks])
    return values, truncated


def _ladder_block(
    model: GraphModel,
    config: PercConfig,
    slabs: Sequence[SlabSpec],
    budget: Budget,
    statistic: Statistic,
    start: int,
    stop: int,
) -> Tuple[np.ndarray, np.ndarray]:
    rows = []
    truncated = np.zeros((stop - start, len(slabs)), dtype=bool)
    for i, index in enumerate(range(start, stop)):
        samples = explore_slab_ladder(model, config, slabs, budget, index)
        rows.append([statistic(s) for s in samples])
        truncated[i] = [s.truncated for s in samples]
    return np.asarray(rows, dtype=float).reshape(stop - start, len(slabs), -1), truncated


def collect_ladder(
    model: GraphModel,
    config: PercConfig,
    statistic: Statistic,
    n_samples: int,
    slabs: Sequence[SlabSpec],
    budget: Budget = Budget(),
    threads: int = 1,
    block_size: int = DEFAULT_BLOCK,
) -> Tuple[np.ndarray, np.ndarray]:
    """Statistic rows for nested slabs explored on one configuration per sample.

    Returns values of shape (n_samples, len(slabs), width) and truncation flags
    of shape (n_samples, len(slabs)). Slice 0 equals collect() on slabs[0].
    """
    if n_samples < 1:
        raise UsageError(f"n_samples must be positive, got {n_samples}")
    task = partial(_ladder_block, model, config, list(slabs), budget, statistic)
    blocks = run_blocks(task, n_samples, threads, block_size)
    values = np.concatenate([b[0] for b in blocks], axis=0)
    truncated = np.concatenate([b[1] for b in blocks], axis=0)
    return values, truncated


def standard_error(values: np.ndarray) -> float:
    if values.shape[0] < 2:
        return 0.0
    return float(np.std(values, ddof=1) / math.sqrt(values.shape[0]))


@dataclass
class EstimateResult:
    """Monte Carlo mean with its standard error and provenance"""

    mean: float
    std_error: float
    n_samples: int
    truncation_fraction: float
    seed: int
    metadata: Dict[str, Any] = field(default_factory=dict)
    interval: Optional[Tuple[float, float]] = None

    @property
    def biased(self) -> bool:
        return self.truncation_fraction > TRUNCATION_WARN

    def to_dict(self) -> Dict[str, Any]:
        row = asdict(self)
        row["interval"] = list(self.interval) if self.interval is not None else None
        return row


def summarize(
    values: np.ndarray,
    truncated: np.ndarray,
    seed: int,
    metadata: Dict[str, Any],
    warn: bool = True,
) -> EstimateResult:
    fraction = float(np.mean(truncated)) if truncated.size else 0.0
    result = EstimateResult(
        mean=float(np.mean(values)),
        std_error=standard_error(values),
        n_samples=int(values.shape[0]),
        truncation_fraction=fraction,
        seed=seed,
        metadata=dict(metadata),
    )
    if warn and result.biased:
        logger.warning(
            f"{metadata.get('statistic', 'estimate')}: truncation fraction {fraction:.2e} "
            f"exceeds {TRUNCATION_WARN:g}; estimate is biased low"
        )
    return result


def run_metadata(
    model: GraphModel, config: PercConfig, budget: Budget, slab: SlabSpec = UNBOUNDED, **extra: Any
) -> Dict[str, Any]:
    meta: Dict[str, Any] = {
        "model": str(model),
        "p": config.describe(),
        "slab": str(slab),
        "budget_vertices": budget.max_vertices,
        "budget_height": budget.max_abs_height,
    }
    meta.update(extra)
    return meta


@dataclass
class DecayPoint:
    """Estimate at layer n together with its normalized log-rate"""

    n: int
    estimate: float
    std_error: float
    value: float
    value_se: float


@dataclass
class DecaySeries:
    points: List[DecayPoint]
    fitted_rate: float
    rate_se: float
    window: Tuple[int, int]
    dropped: List[int] = field(default_factory=list)
    flagged: bool = False
    truncation_fraction: float = 0.0
    seed: int = 0
    metadata: Dict[str, Any] = field(default_factory=dict)

    def point(self, n: int) -> DecayPoint:
        for pt in self.points:
            if pt.n == n:
                return pt
        raise KeyError(n)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def decay_points(
    ns: Sequence[int],
    estimates: np.ndarray,
    errors: np.ndarray,
    t0: float,
    sign: float = -1.0,
) -> Tuple[List[DecayPoint], List[int]]:
    """Points with value = sign * log(estimate) / (n * t0); zero estimates are dropped"""
    points, dropped = [], []
    for n, est, se in zip(ns, estimates, errors):
        if n == 0:
            continue
        if est <= 0.0:
            dropped.append(int(n))
            continue
        value = sign * math.log(est) / (n * t0)
        value_se = se / (est * n * t0)
        points.append(DecayPoint(int(n), float(est), float(se), value, value_se))
    return points, dropped


def fit_decay_rate(
    points: Sequence[DecayPoint],
    t0: float,
    window: Tuple[int, int],
    rel_se_cap: float = 0.5,
    sign: float = -1.0,
) -> Tuple[float, float, List[int]]:
    """Weighted least-squares slope of sign*log(estimate)/t0 against n.

    Only points inside the window whose relative standard error is below the
    cap enter the fit. Returns (rate, rate_se, ns_used); rate is nan when
    fewer than two points qualify.
    """
    n_min, n_max = window
    used = [
        pt
        for pt in points
        if n_min <= pt.n <= n_max and pt.estimate > 0 and pt.std_error / pt.estimate <= rel_se_cap
    ]
    if len(used) < 2:
        return math.nan, math.nan, [pt.n for pt in used]
    x = np.array([pt.n for pt in used], dtype=float)
    y = np.array([sign * math.log(pt.estimate) / t0 for pt in used])
    sigma = np.array([pt.std_error / (pt.estimate * t0) for pt in used])
    positive = sigma[sigma > 0]
    floor = float(positive.min()) if positive.size else 1.0
    sigma = np.where(sigma > 0, sigma, floor)
    coeffs, cov = np.polyfit(x, y, 1, w=1.0 / sigma, cov="unscaled")
    return float(coeffs[0]), float(math.sqrt(max(cov[0, 0], 0.0))), [pt.n for pt in used]


def fit_log_log_slope(
    x: Sequence[float], y: Sequence[float], y_se: Optional[Sequence[float]] = None
) -> Tuple[float, float]:
    """Slope (and its standard error) of log y against log x; nonpositive y are skipped"""
    xs = np.asarray(x, dtype=float)
    ys = np.asarray(y, dtype=float)
    keep = (xs > 0) & (ys > 0)
    if y_se is not None:
        ses = np.asarray(y_se, dtype=float)[keep]
    if keep.sum() < 2:
        return math.nan, math.nan
    lx, ly = np.log(xs[keep]), np.log(ys[keep])
    if y_se is None:
        coeffs, cov = np.polyfit(lx, ly, 1, cov="unscaled")
        resid = ly - np.polyval(coeffs, lx)
        dof = max(len(lx) - 2, 1)
        scale = float(resid @ resid) / dof
        return float(coeffs[0]), float(math.sqrt(max(cov[0, 0] * scale, 0.0)))
    sigma = ses / ys[keep]
    positive = sigma[sigma > 0]
    sigma = np.where(sigma > 0, sigma, float(positive.min()) if positive.size else 1.0)
    coeffs, cov = np.polyfit(lx, ly, 1, w=1.0 / sigma, cov="unscaled")
    return float(coeffs[0]), float(math.sqrt(max(cov[0, 0], 0.0)))
