import math

import pytest

from src.estimators import DepthRule, estimate_chi
from src.exceptions import UsageError
from src.experiments import (
    CurveStatus,
    PhaseClass,
    SweepCell,
    SweepSettings,
    TraceSettings,
    beta_crossing,
    classify,
    exact_chi,
    monotone_violations,
    parse_grid,
    phase_sweep,
    susceptibility_exponent,
    tiltable_cells,
    trace_pcl_curve,
)
from src.oracles import fixed_end_chi, fixed_end_pcl
from src.percolation import Budget, PercConfig


def cell(p_tree, beta, phase=PhaseClass.UNRESOLVED):
    return SweepCell(
        p_tree=p_tree,
        p_lattice=0.001,
        beta_hat=beta,
        se=0.01,
        beta_alt=beta,
        se_alt=0.01,
        truncation_fraction=0.0,
        phase=phase,
        seed=1,
    )


class TestGrid:
    def test_range_is_inclusive(self):
        assert parse_grid("0.2:0.4:0.1") == [0.2, 0.3, 0.4]
        assert parse_grid("0.1, 0.5") == [0.1, 0.5]

    @pytest.mark.parametrize("text", ["0.4:0.2:0.1", "0.1:0.2:0", "a:b:c", "x,y"])
    def test_bad_grids(self, text):
        with pytest.raises(UsageError):
            parse_grid(text)


class TestClassify:
    @pytest.mark.parametrize(
        "beta, expected",
        [
            (1.3, PhaseClass.SUBCRITICAL),
            (0.75, PhaseClass.NONUNIQUE_TILTABLE),
            (0.3, PhaseClass.BEYOND_PT),
            (0.99, PhaseClass.UNRESOLVED),
            (0.51, PhaseClass.UNRESOLVED),
            (math.nan, PhaseClass.UNRESOLVED),
        ],
    )
    def test_classes(self, beta, expected):
        assert classify(beta, 0.02, 3.0, 0.0, 0.01) is expected

    def test_truncation_only_allows_upper_bounds(self):
        assert classify(1.3, 0.02, 3.0, 0.5, 0.01) is PhaseClass.UNRESOLVED
        assert classify(0.3, 0.02, 3.0, 0.5, 0.01) is PhaseClass.BEYOND_PT

    def test_crossing_interpolation(self):
        cells = [cell(0.2, 1.4), cell(0.3, 1.1), cell(0.4, 0.9), cell(0.5, 0.6)]
        assert beta_crossing(cells, 1.0) == pytest.approx(0.35)
        assert math.isnan(beta_crossing(cells, 0.1))

    def test_monotone_violations(self):
        ordered = [
            cell(0.2, 1.4, PhaseClass.SUBCRITICAL),
            cell(0.3, 0.8, PhaseClass.NONUNIQUE_TILTABLE),
            cell(0.4, 0.9, PhaseClass.UNRESOLVED),
            cell(0.5, 0.3, PhaseClass.BEYOND_PT),
        ]
        assert monotone_violations(ordered) == 0
        ordered[3].phase = PhaseClass.SUBCRITICAL
        assert monotone_violations(ordered) == 1


class TestSweep:
    def test_small_product_sweep(self, product):
        settings = SweepSettings(
            n_max=3,
            n_samples=300,
            window=(1, 3),
            depth_rule=DepthRule.fixed(2),
            budget=Budget(5000, 32),
            with_alpha_chi=False,
        )
        grid = phase_sweep(product, [0.15, 0.6], [0.001], 5, settings)
        frame = grid.to_frame()
        assert list(frame.columns[:5]) == ["p_tree", "p_lattice", "beta_hat", "se", "class"]
        assert len(frame) == 2
        low, high = grid.row(0.001)
        assert low.beta_hat > high.beta_hat
        assert sum(grid.metadata["classes"].values()) == 2
        assert grid.metadata["seed"] == 5

    def test_tiltable_window_is_nonempty(self, product):
        settings = SweepSettings(
            n_max=4,
            n_samples=2000,
            window=(1, 4),
            depth_rule=DepthRule.fixed(2),
            budget=Budget(5000, 32),
            with_alpha_chi=False,
        )
        grid = phase_sweep(product, [0.45], [0.001], 6, settings)
        (cell,) = tiltable_cells(grid)
        assert 0.5 + 3 * cell.se < cell.beta_hat < 1.0 - 3 * cell.se
        assert grid.metadata["classes"] == {"NONUNIQUE-TILTABLE": 1}

    @pytest.mark.slow
    def test_crossings_match_tree_thresholds(self, product):
        settings = SweepSettings(
            n_max=4,
            n_samples=4000,
            window=(1, 4),
            depth_rule=DepthRule.fixed(2),
            budget=Budget(5000, 32),
            with_alpha_chi=False,
        )
        grid = phase_sweep(product, [0.30, 0.35, 0.55, 0.60], [0.001], 7, settings)
        # beta = log_3(1 / p) on the tree factor crosses 1 at 1/3 and 1/2 at 3^(-1/2)
        assert 0.31 <= grid.crossings(1.0)[0.001] <= 0.36
        assert 0.55 <= grid.crossings(0.5)[0.001] <= 0.61
        assert grid.metadata["crossing_one"]["0.001"] == grid.crossings(1.0)[0.001]

    def test_sweep_needs_product(self, tree4):
        with pytest.raises(UsageError):
            phase_sweep(tree4, [0.2], [0.001], 1)


class TestTrace:
    def test_brackets_tree_threshold(self, tree4):
        settings = TraceSettings(n_max=3, n_samples=1500, window=(1, 3), depth_rule=DepthRule.fixed(2))
        (point,) = trace_pcl_curve(tree4, [0.0], 0.2, 21, p_lo=0.2, p_hi=0.8, settings=settings)
        assert point.status is not CurveStatus.UNRESOLVED
        assert point.contains(1 / 3)
        assert point.evaluations[0][0] == 0.2

    def test_mirror_lambdas_trace_the_same_interval(self, tree4, within_se):
        settings = TraceSettings(n_max=3, n_samples=1500, window=(1, 3), depth_rule=DepthRule.fixed(2))
        low, high = trace_pcl_curve(tree4, [0.25, 0.75], 0.05, 23, p_lo=0.2, p_hi=0.8, settings=settings)
        assert (low.p_lo, low.p_hi, low.status) == (high.p_lo, high.p_hi, high.status)
        assert low.contains(fixed_end_pcl(4, 0.25).value)
        p = 0.8 * low.p_lo
        chi_low = estimate_chi(tree4, PercConfig.isotropic(tree4, p, 24), 0.25, 3000)
        chi_high = estimate_chi(tree4, PercConfig.isotropic(tree4, p, 25), 0.75, 3000)
        within_se(chi_low.mean, math.hypot(chi_low.std_error, chi_high.std_error), chi_high.mean, k=3.0)
        assert fixed_end_chi(4, p, 0.25).value == pytest.approx(fixed_end_chi(4, p, 0.75).value)

    def test_unbracketed_interval(self, tree4):
        settings = TraceSettings(n_max=3, n_samples=500, window=(1, 3), depth_rule=DepthRule.fixed(2))
        (point,) = trace_pcl_curve(tree4, [0.0], 0.1, 22, p_lo=0.5, p_hi=0.8, settings=settings)
        assert point.status is CurveStatus.UNRESOLVED


class TestExponent:
    def test_exact_chi_lookup(self, tree4, product):
        assert exact_chi(tree4, 0.2, 0.0) == pytest.approx(3.0)
        assert exact_chi(tree4, 0.5, 0.0) == math.inf
        assert exact_chi(product, 0.1, 0.0) is None

    def test_exact_slope_near_critical_point(self, tree4):
        result = susceptibility_exponent(tree4, 1 / 3, [0.1, 0.12], 3, n_samples=200)
        assert result.exact_slope == pytest.approx(-1.0, abs=0.2)
        assert len(result.to_frame()) == 2

    def test_eps_must_lie_below_pc(self, tree4):
        with pytest.raises(UsageError):
            susceptibility_exponent(tree4, 1 / 3, [0.5], 3)
