# src/estimators/decay.py - Slab crossings, probability/expectation decay and peak survival

import logging
import math
from dataclasses import dataclass
from functools import partial
from typing import List, Sequence, Tuple

import numpy as np

from src.estimators.sampling import (
    DecaySeries,
    EstimateResult,
    collect,
    collect_ladder,
    decay_points,
    fit_decay_rate,
    run_metadata,
    standard_error,
    summarize,
)
from src.exceptions import UsageError
from src.graph_models import GraphModel
from src.layers import SlabSpec
from src.percolation import Budget, ClusterSample, PercConfig

logger = logging.getLogger(__name__)


def _reaches(layers: Sequence[int], sample: ClusterSample) -> Sequence[float]:
    return [1.0 if sample.reaches(k) else 0.0 for k in layers]


def _counts(layers: Sequence[int], sample: ClusterSample) -> Sequence[float]:
    return [float(sample.count_at(k)) for k in layers]


def _peak_reaches(layers: Sequence[int], sample: ClusterSample) -> Sequence[float]:
    if not sample.is_peak:
        return [0.0] * len(layers)
    return [1.0 if sample.reaches(k) else 0.0 for k in layers]


def _column_stats(values: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    means = values.mean(axis=0)
    errors = np.array([standard_error(values[:, j]) for j in range(values.shape[1])])
    return means, errors


@dataclass(frozen=True)
class DepthRule:
    """Lower slab depth D for half-space surrogates L_{-D,n}.

    Adaptive rules double D from ``initial`` until the statistic moves by less
    than ``tolerance_se`` standard errors, giving up at ``maximum``.
    """

    initial: int = 2
    maximum: int = 64
    tolerance_se: float = 0.25
    adaptive: bool = True

    @classmethod
    def fixed(cls, depth: int) -> "DepthRule":
        return cls(initial=depth, maximum=depth, adaptive=False)

    def __post_init__(self) -> None:
        if self.initial < 0 or self.maximum < self.initial:
            raise UsageError(f"Bad depth rule {self}")


def estimate_slab_crossing(
    model: GraphModel,
    config: PercConfig,
    slab: SlabSpec,
    target_layer: int,
    n_samples: int,
    budget: Budget = Budget(),
    threads: int = 1,
) -> EstimateResult:
    """Fraction of samples whose slab-constrained cluster meets layer target_layer"""
    if not slab.contains(target_layer):
        raise UsageError(f"Target layer {target_layer} lies outside slab {slab}")
    values, truncated = collect(
        model, config, partial(_reaches, [target_layer]), n_samples, slab, budget, threads
    )
    meta = run_metadata(model, config, budget, slab, statistic="slab_crossing", target_layer=target_layer)
    return summarize(values[:, 0], truncated, config.master_seed, meta)


def estimate_alpha(
    model: GraphModel,
    config: PercConfig,
    n_max: int,
    n_samples: int,
    budget: Budget = Budget(),
    window: Tuple[int, int] = (1, 8),
    rel_se_cap: float = 0.5,
    threads: int = 1,
) -> DecaySeries:
    """Upward crossing probabilities P(origin reaches L_n inside the upper half-space).

    One exploration per sample in the slab [0, +inf) yields the indicator for
    every n at once. Layers with no observed crossing are dropped from the fit.
    """
    layers = list(range(n_max + 1))
    slab = SlabSpec(0, math.inf)
    values, truncated = collect(model, config, partial(_reaches, layers), n_samples, slab, budget, threads)
    means, errors = _column_stats(values)
    points, dropped = decay_points(layers, means, errors, model.t0)
    fit_window = (max(window[0], 1), min(window[1], n_max))
    rate, rate_se, used = fit_decay_rate(points, model.t0, fit_window, rel_se_cap)
    if dropped:
        logger.info(f"alpha: layers {dropped} had no observed crossing and were dropped")
    in_window = [n for n in range(fit_window[0], fit_window[1] + 1)]
    zero_in_window = [n for n in dropped if n in in_window]
    flagged = math.isnan(rate) or 2 * len(zero_in_window) > len(in_window)
    if flagged:
        logger.warning(
            f"alpha: refusing fit in window {fit_window}: {len(zero_in_window)} zero-count layers, "
            f"{len(used)} usable points"
        )
        rate, rate_se = math.nan, math.nan
    meta = run_metadata(model, config, budget, slab, statistic="alpha", fit_points=used)
    return DecaySeries(
        points=points,
        fitted_rate=rate,
        rate_se=rate_se,
        window=fit_window,
        dropped=dropped,
        flagged=flagged,
        truncation_fraction=float(truncated.mean()),
        seed=config.master_seed,
        metadata=meta,
    )


class SlabFactory:
    """Slab L_{-D,hi} as a function of the depth D"""

    def __init__(self, hi: int):
        self.hi = hi

    def __call__(self, depth: int) -> SlabSpec:
        return SlabSpec(-depth, self.hi)


def _layer_expectations(
    model: GraphModel,
    config: PercConfig,
    slab: SlabSpec,
    layers: Sequence[int],
    n_samples: int,
    budget: Budget,
    threads: int,
) -> Tuple[np.ndarray, np.ndarray, float]:
    values, truncated = collect(model, config, partial(_counts, list(layers)), n_samples, slab, budget, threads)
    means, errors = _column_stats(values)
    return means, errors, float(truncated.mean())


def _stabilized(
    model: GraphModel,
    config: PercConfig,
    slab_for: SlabFactory,
    layers: Sequence[int],
    n_samples: int,
    budget: Budget,
    rule: DepthRule,
    threads: int,
) -> Tuple[np.ndarray, np.ndarray, float, int, bool]:
    """Expectations of X at the given layers with the depth rule applied.

    Each doubling explores depths D and 2D on one configuration per sample,
    so the shift between them is a paired difference measured against the
    standard error of the deeper estimate.
    """
    depth = rule.initial
    if not rule.adaptive or depth * 2 > rule.maximum:
        means, errors, trunc = _layer_expectations(
            model, config, slab_for(depth), layers, n_samples, budget, threads
        )
        if rule.adaptive:
            logger.warning(f"beta: no room to double depth {depth} below maximum {rule.maximum}")
        return means, errors, trunc, depth, not rule.adaptive
    statistic = partial(_counts, list(layers))
    while depth * 2 <= rule.maximum:
        deeper = depth * 2
        values, truncated = collect_ladder(
            model, config, statistic, n_samples, [slab_for(depth), slab_for(deeper)], budget, threads
        )
        means, errors = _column_stats(values[:, 1, :])
        shift = np.abs((values[:, 1, :] - values[:, 0, :]).mean(axis=0))
        trunc = float(truncated[:, 1].mean())
        depth = deeper
        if np.all(shift <= rule.tolerance_se * errors):
            return means, errors, trunc, depth, True
    logger.warning(f"beta: statistic still moving at depth {depth} (maximum {rule.maximum})")
    return means, errors, trunc, depth, False


def estimate_beta(
    model: GraphModel,
    config: PercConfig,
    n_max: int,
    n_samples: int,
    depth_rule: DepthRule = DepthRule(),
    budget: Budget = Budget(),
    window: Tuple[int, int] = (1, 8),
    rel_se_cap: float = 0.5,
    downward: bool = False,
    threads: int = 1,
) -> DecaySeries:
    """Expectation decay of X_n in the slab L_{-D,n} with D from the depth rule.

    The upward series has value -(1/n) log E[X_n] / t0 and its fitted slope is
    the beta estimate. With downward=True the slab is L_{-D,0}, the target is
    layer -n and the value is +(1/n) log E[X_{-n}] / t0, whose slope estimates
    1 - beta.
    """
    fit_window = (max(window[0], 1), min(window[1], n_max))
    sign = 1.0 if downward else -1.0
    all_points = []
    depths: List[int] = []
    stable = True
    trunc_fractions = []
    if downward:
        layers = [-n for n in range(1, n_max + 1)]
        rule = depth_rule
        if rule.initial < n_max:
            rule = DepthRule(n_max, max(rule.maximum, n_max), rule.tolerance_se, rule.adaptive)
        means, errors, trunc, depth, ok = _stabilized(
            model, config, SlabFactory(0), layers, n_samples, budget, rule, threads
        )
        all_points, dropped = decay_points(range(1, n_max + 1), means, errors, model.t0, sign)
        depths.append(depth)
        stable = ok
        trunc_fractions.append(trunc)
    else:
        dropped = []
        for n in range(1, n_max + 1):
            means, errors, trunc, depth, ok = _stabilized(
                model, config, SlabFactory(n), [n], n_samples, budget, depth_rule, threads
            )
            pts, lost = decay_points([n], means, errors, model.t0, sign)
            all_points.extend(pts)
            dropped.extend(lost)
            depths.append(depth)
            stable = stable and ok
            trunc_fractions.append(trunc)
    rate, rate_se, used = fit_decay_rate(all_points, model.t0, fit_window, rel_se_cap, sign)
    if dropped:
        logger.info(f"beta: layers {dropped} had zero observed mass and were dropped")
    flagged = not stable or math.isnan(rate)
    meta = run_metadata(
        model,
        config,
        budget,
        statistic="beta_down" if downward else "beta",
        depths=depths,
        depth_adaptive=depth_rule.adaptive,
        fit_points=used,
    )
    return DecaySeries(
        points=all_points,
        fitted_rate=rate,
        rate_se=rate_se,
        window=fit_window,
        dropped=dropped,
        flagged=flagged,
        truncation_fraction=max(trunc_fractions) if trunc_fractions else 0.0,
        seed=config.master_seed,
        metadata=meta,
    )


def estimate_peak_survival(
    model: GraphModel,
    config: PercConfig,
    k_max: int,
    n_samples: int,
    budget: Budget = Budget(),
    rel_se_cap: float = 0.5,
    threads: int = 1,
) -> DecaySeries:
    """P(origin is the peak of its cluster and the cluster meets L_{-k}) for k = 0..k_max.

    Unconstrained exploration; the height budget must exceed k_max. The fitted
    rate converts to the per-level survival ratio exp(-rate * t0).
    """
    if budget.max_abs_height <= k_max:
        raise UsageError(f"Height budget {budget.max_abs_height} must exceed k_max={k_max}")
    layers = [-k for k in range(k_max + 1)]
    values, truncated = collect(model, config, partial(_peak_reaches, layers), n_samples, budget=budget, threads=threads)
    means, errors = _column_stats(values)
    points, dropped = decay_points(range(k_max + 1), means, errors, model.t0)
    rate, rate_se, used = fit_decay_rate(points, model.t0, (1, k_max), rel_se_cap)
    meta = run_metadata(
        model,
        config,
        budget,
        statistic="peak_survival",
        peak_probability=float(means[0]),
        peak_probability_se=float(errors[0]),
        per_level_ratio=math.exp(-rate * model.t0) if not math.isnan(rate) else math.nan,
        fit_points=used,
    )
    return DecaySeries(
        points=points,
        fitted_rate=rate,
        rate_se=rate_se,
        window=(1, k_max),
        dropped=dropped,
        flagged=math.isnan(rate),
        truncation_fraction=float(truncated.mean()),
        seed=config.master_seed,
        metadata=meta,
    )


def peak_probabilities(series: DecaySeries) -> List[Tuple[int, float, float]]:
    """(k, estimate, std_error) rows of a peak-survival series including k = 0"""
    rows = [(0, series.metadata["peak_probability"], series.metadata["peak_probability_se"])]
    rows.extend((pt.n, pt.estimate, pt.std_error) for pt in series.points)
    return rows
