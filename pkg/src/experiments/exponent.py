# src/experiments/exponent.py - Susceptibility exponent near p_c

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence

import pandas as pd

from src.estimators import estimate_chi, fit_log_log_slope
from src.exceptions import DivergenceError, UsageError
from src.graph_models import Family, GraphModel
from src.oracles import fixed_end_chi, oriented_chi_closed
from src.percolation import Budget, PercConfig

logger = logging.getLogger(__name__)


@dataclass
class ExponentResult:
    """chi at p_c - eps over an eps grid and the fitted log-log slope (about -1 off p_t)"""

    p_c: float
    lam: float
    eps: List[float]
    chi: List[float]
    chi_se: List[float]
    truncation: List[float]
    exact: List[float]
    slope: float
    slope_se: float
    exact_slope: float = math.nan
    metadata: Dict[str, Any] = field(default_factory=dict)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {
                "eps": self.eps,
                "chi_hat": self.chi,
                "se": self.chi_se,
                "exact": self.exact,
                "truncation_fraction": self.truncation,
            }
        )


def exact_chi(model: GraphModel, p: float, lam: float) -> Optional[float]:
    """Closed-form chi where one exists, else None"""
    try:
        if model.family is Family.FIXED_END_TREE:
            return fixed_end_chi(model.k, p, lam).value
        if model.family is Family.ORIENTED_TREE_112:
            return oriented_chi_closed(p, lam).value
    except DivergenceError:
        return math.inf
    return None


def susceptibility_exponent(
    model: GraphModel,
    p_c: float,
    eps_grid: Sequence[float],
    master_seed: int,
    lam: float = 0.0,
    n_samples: int = 10000,
    budget: Budget = Budget(),
    threads: int = 1,
) -> ExponentResult:
    """Fit log chi_{p_c - eps} against log eps for isotropic percolation"""
    if any(not 0.0 < e < p_c for e in eps_grid):
        raise UsageError(f"eps values must lie in (0, {p_c})")
    chis, ses, truncs, exact = [], [], [], []
    for eps in eps_grid:
        config = PercConfig.isotropic(model, p_c - eps, master_seed)
        result = estimate_chi(model, config, lam, n_samples, budget, threads)
        chis.append(result.mean)
        ses.append(result.std_error)
        truncs.append(result.truncation_fraction)
        value = exact_chi(model, p_c - eps, lam)
        exact.append(math.nan if value is None else value)
        logger.info(f"eps={eps:g}: chi={result.mean:.4f} +- {result.std_error:.4f}")
    slope, slope_se = fit_log_log_slope(eps_grid, chis, ses)
    exact_slope = math.nan
    if all(math.isfinite(x) for x in exact):
        exact_slope, _ = fit_log_log_slope(eps_grid, exact)
    return ExponentResult(
        p_c=p_c,
        lam=lam,
        eps=list(eps_grid),
        chi=chis,
        chi_se=ses,
        truncation=truncs,
        exact=exact,
        slope=slope,
        slope_se=slope_se,
        exact_slope=exact_slope,
        metadata={"model": str(model), "seed": master_seed, "lambda": lam, "p_c": p_c},
    )
