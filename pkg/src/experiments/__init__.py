from src.experiments.curve import CurvePoint, CurveStatus, TraceSettings, trace_pcl_curve
from src.experiments.exponent import ExponentResult, exact_chi, susceptibility_exponent
from src.experiments.sweep import (
    PhaseClass,
    SweepCell,
    SweepGrid,
    SweepSettings,
    beta_crossing,
    classify,
    monotone_violations,
    parse_grid,
    phase_sweep,
    tiltable_cells,
)

__all__ = [
    "CurvePoint",
    "CurveStatus",
    "ExponentResult",
    "PhaseClass",
    "SweepCell",
    "SweepGrid",
    "SweepSettings",
    "TraceSettings",
    "beta_crossing",
    "classify",
    "exact_chi",
    "monotone_violations",
    "parse_grid",
    "phase_sweep",
    "susceptibility_exponent",
    "tiltable_cells",
    "trace_pcl_curve",
]
