from src.estimators.decay import (
    DepthRule,
    estimate_alpha,
    estimate_beta,
    estimate_peak_survival,
    estimate_slab_crossing,
    peak_probabilities,
)
from src.estimators.sampling import (
    DecayPoint,
    DecaySeries,
    EstimateResult,
    collect,
    fit_decay_rate,
    fit_log_log_slope,
    resolve_threads,
)
from src.estimators.susceptibility import (
    VolumeDraw,
    draw_tilted_volumes,
    estimate_chi,
    estimate_magnetization,
    estimate_truncated_susceptibility,
)
from src.estimators.tail import TailTable, estimate_tail, fit_tail_exponent
from src.estimators.triangle import estimate_triangle

__all__ = [
    "DecayPoint",
    "DecaySeries",
    "DepthRule",
    "EstimateResult",
    "TailTable",
    "VolumeDraw",
    "collect",
    "draw_tilted_volumes",
    "estimate_alpha",
    "estimate_beta",
    "estimate_chi",
    "estimate_magnetization",
    "estimate_peak_survival",
    "estimate_slab_crossing",
    "estimate_tail",
    "estimate_triangle",
    "estimate_truncated_susceptibility",
    "fit_decay_rate",
    "fit_log_log_slope",
    "fit_tail_exponent",
    "peak_probabilities",
    "resolve_threads",
]
