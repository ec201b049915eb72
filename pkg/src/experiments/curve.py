# src/experiments/curve.py - Bisection tracer for the p_c(lambda) curve

import enum
import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Sequence, Tuple

from src.estimators import DepthRule, estimate_beta
from src.graph_models import GraphModel
from src.percolation import Budget, PercConfig

logger = logging.getLogger(__name__)


class CurveStatus(enum.Enum):
    RESOLVED = "resolved"
    AMBIGUOUS = "ambiguous"
    UNRESOLVED = "unresolved"


@dataclass
class CurvePoint:
    """Interval [p_lo, p_hi] bracketing p_c(lambda)"""

    lam: float
    p_lo: float
    p_hi: float
    status: CurveStatus
    evaluations: List[Tuple[float, float, float]] = field(default_factory=list)

    @property
    def width(self) -> float:
        return self.p_hi - self.p_lo

    def contains(self, p: float) -> bool:
        return self.p_lo <= p <= self.p_hi

    def to_row(self) -> Dict[str, Any]:
        return {"lambda": self.lam, "p_lo": self.p_lo, "p_hi": self.p_hi, "status": self.status.value}


@dataclass(frozen=True)
class TraceSettings:
    n_max: int = 8
    n_samples: int = 4000
    window: Tuple[int, int] = (1, 8)
    rel_se_cap: float = 0.5
    margin: float = 3.0
    depth_rule: DepthRule = DepthRule.fixed(16)
    budget: Budget = Budget()
    threads: int = 1


def _side(beta: float, se: float, target: float, margin: float) -> int:
    """+1 when beta is clearly above target (p below p_c), -1 clearly below, 0 ambiguous"""
    if math.isnan(beta):
        return 0
    if beta - margin * se > target:
        return 1
    if beta + margin * se < target:
        return -1
    return 0


def trace_pcl_curve(
    model: GraphModel,
    lambdas: Sequence[float],
    tolerance: float,
    master_seed: int,
    p_lo: float = 0.05,
    p_hi: float = 0.95,
    settings: TraceSettings = TraceSettings(),
) -> List[CurvePoint]:
    """Bisect on isotropic p until the beta estimate brackets max(lambda, 1 - lambda).

    Every evaluation reuses the master seed, so neighbouring p values run on
    common random numbers and beta is monotone in p up to fit noise.
    """
    cache: Dict[float, Tuple[float, float]] = {}

    def beta_at(p: float) -> Tuple[float, float]:
        if p not in cache:
            config = PercConfig.isotropic(model, p, master_seed)
            series = estimate_beta(
                model,
                config,
                settings.n_max,
                settings.n_samples,
                settings.depth_rule,
                settings.budget,
                settings.window,
                settings.rel_se_cap,
                threads=settings.threads,
            )
            cache[p] = (series.fitted_rate, series.rate_se)
            logger.info(f"beta({p:.6f}) = {series.fitted_rate:.4f} +- {series.rate_se:.4f}")
        return cache[p]

    curve = []
    for lam in lambdas:
        target = max(lam, 1.0 - lam)
        lo, hi = p_lo, p_hi
        evaluations: List[Tuple[float, float, float]] = []
        sides = []
        for p in (lo, hi):
            beta, se = beta_at(p)
            evaluations.append((p, beta, se))
            sides.append(_side(beta, se, target, settings.margin))
        if sides != [1, -1]:
            logger.warning(f"lambda={lam}: [{lo}, {hi}] does not bracket beta={target}")
            curve.append(CurvePoint(lam, lo, hi, CurveStatus.UNRESOLVED, evaluations))
            continue
        status = CurveStatus.RESOLVED
        while hi - lo > tolerance:
            mid = 0.5 * (lo + hi)
            beta, se = beta_at(mid)
            evaluations.append((mid, beta, se))
            side = _side(beta, se, target, settings.margin)
            if side > 0:
                lo = mid
            elif side < 0:
                hi = mid
            else:
                status = CurveStatus.AMBIGUOUS
                break
        logger.info(f"lambda={lam}: p_c in [{lo:.5f}, {hi:.5f}] ({status.value})")
        curve.append(CurvePoint(lam, lo, hi, status, evaluations))
    return curve
