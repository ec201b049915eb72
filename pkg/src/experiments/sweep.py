# src/experiments/sweep.py - Anisotropic phase sweep over tree x lattice products

import enum
import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from src.estimators import DepthRule, estimate_alpha, estimate_beta, estimate_chi, fit_decay_rate
from src.exceptions import UsageError
from src.graph_models import EdgeOrbit, Family, GraphModel
from src.percolation import Budget, PercConfig

logger = logging.getLogger(__name__)


class PhaseClass(enum.Enum):
    SUBCRITICAL = "SUBCRITICAL"
    NONUNIQUE_TILTABLE = "NONUNIQUE-TILTABLE"
    BEYOND_PT = "BEYOND-p_t"
    UNRESOLVED = "UNRESOLVED"


def parse_grid(text: str) -> List[float]:
    """``lo:hi:step`` (inclusive) or a comma list"""
    text = text.strip()
    if ":" in text:
        try:
            lo, hi, step = (float(x) for x in text.split(":"))
        except ValueError as e:
            raise UsageError(f"Grid must look like lo:hi:step, got '{text}'") from e
        if step <= 0 or hi < lo:
            raise UsageError(f"Empty grid '{text}'")
        count = int(math.floor((hi - lo) / step + 1e-9)) + 1
        return [round(lo + i * step, 12) for i in range(count)]
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as e:
        raise UsageError(f"Bad grid '{text}'") from e


def classify(beta: float, se: float, margin: float, truncation: float, truncation_cap: float) -> PhaseClass:
    if math.isnan(beta) or math.isnan(se):
        return PhaseClass.UNRESOLVED
    slack = margin * se
    if truncation > truncation_cap:
        # truncated counts are lower bounds, so beta is only bounded from above
        return PhaseClass.BEYOND_PT if beta + slack < 0.5 else PhaseClass.UNRESOLVED
    if beta - slack > 1.0:
        return PhaseClass.SUBCRITICAL
    if 0.5 + slack < beta < 1.0 - slack:
        return PhaseClass.NONUNIQUE_TILTABLE
    if beta + slack < 0.5:
        return PhaseClass.BEYOND_PT
    return PhaseClass.UNRESOLVED


@dataclass(frozen=True)
class SweepSettings:
    n_max: int = 8
    n_samples: int = 2000
    window: Tuple[int, int] = (1, 8)
    alt_window: Optional[Tuple[int, int]] = None
    rel_se_cap: float = 0.5
    margin: float = 3.0
    truncation_cap: float = 1e-2
    depth_rule: DepthRule = DepthRule.fixed(16)
    budget: Budget = Budget()
    with_alpha_chi: bool = True
    threads: int = 1

    @property
    def second_window(self) -> Tuple[int, int]:
        if self.alt_window is not None:
            return self.alt_window
        return (max(2, self.n_max // 2), self.n_max)


@dataclass
class SweepCell:
    p_tree: float
    p_lattice: float
    beta_hat: float
    se: float
    beta_alt: float
    se_alt: float
    truncation_fraction: float
    phase: PhaseClass
    seed: int
    alpha_hat: float = math.nan
    alpha_se: float = math.nan
    chi_half: float = math.nan
    chi_half_se: float = math.nan
    extras_truncation_fraction: float = 0.0

    def to_row(self) -> Dict[str, Any]:
        return {
            "p_tree": self.p_tree,
            "p_lattice": self.p_lattice,
            "beta_hat": self.beta_hat,
            "se": self.se,
            "class": self.phase.value,
            "beta_alt": self.beta_alt,
            "se_alt": self.se_alt,
            "alpha_hat": self.alpha_hat,
            "alpha_se": self.alpha_se,
            "chi_half": self.chi_half,
            "chi_half_se": self.chi_half_se,
            "truncation_fraction": self.truncation_fraction,
            "extras_truncation_fraction": self.extras_truncation_fraction,
            "seed": self.seed,
        }


@dataclass
class SweepGrid:
    p_tree: List[float]
    p_lattice: List[float]
    cells: List[SweepCell]
    settings: SweepSettings
    metadata: Dict[str, Any] = field(default_factory=dict)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame([c.to_row() for c in self.cells])

    def row(self, p_lattice: float) -> List[SweepCell]:
        return sorted((c for c in self.cells if c.p_lattice == p_lattice), key=lambda c: c.p_tree)

    def crossings(self, target: float) -> Dict[float, float]:
        """Per p_lattice row, the interpolated p_tree where beta falls through target"""
        located = {}
        for p_lattice in self.p_lattice:
            located[p_lattice] = beta_crossing(self.row(p_lattice), target)
        return located


def beta_crossing(cells: Sequence[SweepCell], target: float) -> float:
    """Linear interpolation between the first pair of cells with beta_i >= target > beta_{i+1}"""
    usable = [c for c in cells if not math.isnan(c.beta_hat)]
    for left, right in zip(usable, usable[1:]):
        if left.beta_hat >= target > right.beta_hat:
            frac = (left.beta_hat - target) / (left.beta_hat - right.beta_hat)
            return left.p_tree + frac * (right.p_tree - left.p_tree)
    return math.nan


def sweep_cell(
    model: GraphModel, p_tree: float, p_lattice: float, master_seed: int, settings: SweepSettings
) -> SweepCell:
    config = PercConfig.for_model(
        model, {EdgeOrbit.TREE: p_tree, EdgeOrbit.LATTICE: p_lattice}, master_seed
    )
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
    beta_alt, se_alt, _ = fit_decay_rate(series.points, model.t0, settings.second_window, settings.rel_se_cap)
    truncation = series.truncation_fraction
    phase = classify(series.fitted_rate, series.rate_se, settings.margin, truncation, settings.truncation_cap)
    cell = SweepCell(
        p_tree=p_tree,
        p_lattice=p_lattice,
        beta_hat=series.fitted_rate,
        se=series.rate_se,
        beta_alt=beta_alt,
        se_alt=se_alt,
        truncation_fraction=truncation,
        phase=phase,
        seed=master_seed,
    )
    if settings.with_alpha_chi:
        alpha = estimate_alpha(
            model,
            config,
            settings.n_max,
            settings.n_samples,
            settings.budget,
            settings.window,
            settings.rel_se_cap,
            threads=settings.threads,
        )
        chi = estimate_chi(model, config, 0.5, settings.n_samples, settings.budget, settings.threads)
        cell.alpha_hat, cell.alpha_se = alpha.fitted_rate, alpha.rate_se
        cell.chi_half, cell.chi_half_se = chi.mean, chi.std_error
        cell.extras_truncation_fraction = max(alpha.truncation_fraction, chi.truncation_fraction)
    logger.info(
        f"cell p_tree={p_tree:.4f} p_lattice={p_lattice:.4f}: beta={cell.beta_hat:.4f} "
        f"+- {cell.se:.4f} -> {cell.phase.value}"
    )
    return cell


def phase_sweep(
    model: GraphModel,
    p_tree_grid: Sequence[float],
    p_lattice_grid: Sequence[float],
    master_seed: int,
    settings: SweepSettings = SweepSettings(),
) -> SweepGrid:
    """beta, alpha and chi_{1/2} estimates with a phase class for every grid cell.

    All cells reuse the master seed, so neighbouring cells run on common
    random numbers and classes are monotone along increasing rays up to fit
    noise. Exact nesting needs explore_coupled.
    """
    if model.family is not Family.TREE_X_LATTICE:
        raise UsageError(f"phase_sweep needs a tree-x-lattice model, got {model}")
    for p in list(p_tree_grid) + list(p_lattice_grid):
        if not 0.0 < p < 1.0:
            raise UsageError(f"Grid probabilities must lie in (0, 1), got {p}")
    cells = [
        sweep_cell(model, pt, pl, master_seed, settings)
        for pl in p_lattice_grid
        for pt in p_tree_grid
    ]
    grid = SweepGrid(list(p_tree_grid), list(p_lattice_grid), cells, settings)
    grid.metadata = {
        "model": str(model),
        "seed": master_seed,
        "budget_vertices": settings.budget.max_vertices,
        "budget_height": settings.budget.max_abs_height,
        "window": list(settings.window),
        "alt_window": list(settings.second_window),
        "margin": settings.margin,
        "crossing_one": {str(k): v for k, v in grid.crossings(1.0).items()},
        "crossing_half": {str(k): v for k, v in grid.crossings(0.5).items()},
        "classes": {
            str(k): int(v)
            for k, v in pd.Series([c.phase.value for c in cells]).value_counts().sort_index().items()
        },
    }
    return grid


def tiltable_cells(grid: SweepGrid) -> List[SweepCell]:
    return [c for c in grid.cells if c.phase is PhaseClass.NONUNIQUE_TILTABLE]


def monotone_violations(cells: Sequence[SweepCell]) -> int:
    """Count of adjacent pairs along a ray whose class order decreases"""
    rank = {
        PhaseClass.SUBCRITICAL: 0,
        PhaseClass.NONUNIQUE_TILTABLE: 1,
        PhaseClass.BEYOND_PT: 2,
    }
    ranks = [rank[c.phase] for c in cells if c.phase in rank]
    return int(np.sum(np.diff(ranks) < 0)) if len(ranks) > 1 else 0
