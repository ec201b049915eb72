import logging
import math

import numpy as np
import pytest

from src.estimators import (
    DepthRule,
    draw_tilted_volumes,
    estimate_alpha,
    estimate_beta,
    estimate_chi,
    estimate_magnetization,
    estimate_peak_survival,
    estimate_slab_crossing,
    estimate_tail,
    estimate_triangle,
    estimate_truncated_susceptibility,
    fit_decay_rate,
    fit_log_log_slope,
    fit_tail_exponent,
    peak_probabilities,
    resolve_threads,
)
from src.estimators.sampling import collect, decay_points, run_blocks, summarize
from src.exceptions import UsageError
from src.layers import SlabSpec
from src.oracles import ball_triangle, fixed_end_chi, peak_reach, tree_cluster
from src.percolation import Budget, PercConfig


class TestSampling:
    def test_blocks_come_back_in_index_order(self):
        blocks = run_blocks(lambda start, stop: (start, stop), 10, threads=1, block_size=4)
        assert blocks == [(0, 4), (4, 8), (8, 10)]

    def test_resolve_threads(self):
        assert resolve_threads(3) == 3
        assert resolve_threads(0) >= 1
        assert resolve_threads(None) >= 1

    def test_summarize_warns_on_truncation(self, caplog):
        values = np.ones(100)
        truncated = np.zeros(100, dtype=bool)
        truncated[:5] = True
        with caplog.at_level(logging.WARNING):
            result = summarize(values, truncated, 1, {"statistic": "chi"})
        assert result.truncation_fraction == pytest.approx(0.05)
        assert result.biased
        assert "biased low" in caplog.text

    def test_decay_fit_recovers_exact_rate(self):
        t0 = math.log(3)
        ns = list(range(0, 7))
        estimates = np.array([0.4**n for n in ns])
        points, dropped = decay_points(ns, estimates, estimates * 0.01, t0)
        assert dropped == []
        assert [pt.n for pt in points] == ns[1:]
        rate, rate_se, used = fit_decay_rate(points, t0, (1, 6))
        assert rate == pytest.approx(math.log(1 / 0.4) / t0, rel=1e-10)
        assert used == [1, 2, 3, 4, 5, 6]

    def test_decay_fit_needs_two_points(self):
        t0 = 1.0
        points, dropped = decay_points([1, 2, 3], np.array([0.5, 0.0, 0.0]), np.array([0.01, 0.0, 0.0]), t0)
        assert dropped == [2, 3]
        rate, rate_se, _ = fit_decay_rate(points, t0, (1, 3))
        assert math.isnan(rate) and math.isnan(rate_se)

    def test_log_log_slope(self):
        x = [10.0, 100.0, 1000.0]
        slope, _ = fit_log_log_slope(x, [3 * v**-0.5 for v in x])
        assert slope == pytest.approx(-0.5)
        slope, _ = fit_log_log_slope(x, [2 / v for v in x], [1e-3, 1e-4, 1e-5])
        assert slope == pytest.approx(-1.0)


class TestSusceptibility:
    def test_chi_on_tree(self, tree4, within_se):
        config = PercConfig.isotropic(tree4, 0.2, 7)
        result = estimate_chi(tree4, config, 0.0, 4000)
        within_se(result.mean, result.std_error, 3.0)
        assert result.truncation_fraction == 0.0
        assert result.metadata["budget_vertices"] == 100000

    def test_tilted_chi_on_tree(self, tree4, within_se):
        config = PercConfig.isotropic(tree4, 0.2, 8)
        result = estimate_chi(tree4, config, 0.5, 4000)
        within_se(result.mean, result.std_error, fixed_end_chi(4, 0.2, 0.5).value)

    def test_lambda_symmetry_on_product(self, product, within_se):
        low = estimate_chi(product, PercConfig.isotropic(product, 0.15, 1), 0.3, 3000)
        high = estimate_chi(product, PercConfig.isotropic(product, 0.15, 2), 0.7, 3000)
        within_se(low.mean, math.hypot(low.std_error, high.std_error), high.mean)

    def test_magnetization_derivative(self, tree4):
        config = PercConfig.isotropic(tree4, 0.25, 3)
        draw = draw_tilted_volumes(tree4, config, 0.3, 2000)
        h, step = 0.5, 1e-2
        upper = estimate_magnetization(tree4, config, 0.3, h + step, 2000, draw=draw)
        lower = estimate_magnetization(tree4, config, 0.3, h - step, 2000, draw=draw)
        chi_h = estimate_truncated_susceptibility(tree4, config, 0.3, h, 2000, draw=draw)
        assert (upper.mean - lower.mean) / (2 * step) == pytest.approx(chi_h.mean, abs=1e-3)

    def test_magnetization_limits(self, tree4):
        config = PercConfig.isotropic(tree4, 0.25, 3)
        draw = draw_tilted_volumes(tree4, config, 0.0, 500)
        assert estimate_magnetization(tree4, config, 0.0, 0.0, 500, draw=draw).mean == 0.0
        assert 0.0 < estimate_magnetization(tree4, config, 0.0, 1.0, 500, draw=draw).mean <= 1.0
        chi = estimate_chi(tree4, config, 0.0, 500, draw=draw)
        chi_0 = estimate_truncated_susceptibility(tree4, config, 0.0, 0.0, 500, draw=draw)
        assert chi_0.mean == chi.mean

    def test_negative_field_rejected(self, tree4):
        with pytest.raises(UsageError):
            estimate_magnetization(tree4, PercConfig.isotropic(tree4, 0.2), 0.0, -1.0, 10)


class TestDecay:
    def test_slab_crossing(self, tree4, within_se):
        config = PercConfig.isotropic(tree4, 0.5, 11)
        result = estimate_slab_crossing(tree4, config, SlabSpec(0, 6), 6, 4000)
        within_se(result.mean, result.std_error, 0.015625)
        assert result.metadata["slab"] == "0:6"

    def test_crossing_target_outside_slab(self, tree4):
        with pytest.raises(UsageError):
            estimate_slab_crossing(tree4, PercConfig.isotropic(tree4, 0.5), SlabSpec(0, 6), 7, 10)

    def test_alpha_points_on_tree(self, tree4, within_se):
        config = PercConfig.isotropic(tree4, 0.5, 12)
        series = estimate_alpha(tree4, config, 4, 2000, window=(1, 4))
        for pt in series.points:
            within_se(pt.estimate, pt.std_error, 0.5**pt.n)
        assert not series.flagged
        assert series.fitted_rate == pytest.approx(math.log(2) / math.log(3), abs=0.15)

    def test_beta_upward_on_tree(self, tree4, within_se):
        config = PercConfig.isotropic(tree4, 0.4, 13)
        series = estimate_beta(tree4, config, 3, 1000, DepthRule.fixed(4), window=(1, 3))
        for pt in series.points:
            within_se(pt.estimate, pt.std_error, 0.4**pt.n)
        assert series.fitted_rate == pytest.approx(math.log(1 / 0.4) / math.log(3), abs=0.15)
        assert series.metadata["depths"] == [4, 4, 4]

    def test_beta_downward_on_tree(self, tree4, within_se):
        config = PercConfig.isotropic(tree4, 0.4, 14)
        series = estimate_beta(tree4, config, 3, 2000, DepthRule.fixed(3), window=(1, 3), downward=True)
        assert [pt.n for pt in series.points] == [1, 2, 3]
        for pt in series.points:
            within_se(pt.estimate, pt.std_error, 1.2**pt.n)

    @pytest.mark.parametrize("seed", [15, 16, 17])
    def test_adaptive_depth_stops_at_first_doubling_on_tree(self, tree4, seed):
        # on the tree only the ancestor chain reaches layer n, so depth is irrelevant
        config = PercConfig.isotropic(tree4, 0.4, seed)
        series = estimate_beta(tree4, config, 4, 1000, DepthRule(), window=(1, 4))
        assert series.metadata["depths"] == [4, 4, 4, 4]
        assert series.metadata["depth_adaptive"] is True
        assert not series.flagged
        shallow = estimate_beta(tree4, config, 4, 1000, DepthRule.fixed(2), window=(1, 4))
        assert series.fitted_rate == shallow.fitted_rate

    def test_adaptive_depth_downward_on_tree(self, tree4):
        config = PercConfig.isotropic(tree4, 0.4, 18)
        series = estimate_beta(tree4, config, 3, 500, DepthRule(), window=(1, 3), downward=True)
        assert series.metadata["depths"] == [6]

    def test_peak_survival(self, tree4, within_se):
        config = PercConfig.isotropic(tree4, 0.25, 16)
        series = estimate_peak_survival(tree4, config, 3, 3000)
        rows = peak_probabilities(series)
        assert rows[0][0] == 0
        within_se(rows[0][1], rows[0][2], 0.75)
        for k, estimate, se in rows[1:]:
            within_se(estimate, se, peak_reach(4, 0.25, k).value)

    def test_peak_per_level_ratio(self, tree4):
        config = PercConfig.isotropic(tree4, 0.25, 19)
        series = estimate_peak_survival(tree4, config, 6, 4000)
        exact = np.array([peak_reach(4, 0.25, k).value for k in range(1, 7)])
        errors = np.array([series.point(k).std_error for k in range(1, 7)])
        points, _ = decay_points(range(1, 7), exact, errors, tree4.t0)
        exact_rate, _, _ = fit_decay_rate(points, tree4.t0, (1, 6))
        assert series.fitted_rate == pytest.approx(exact_rate, abs=3 * series.rate_se)
        ratio = series.metadata["per_level_ratio"]
        assert ratio == pytest.approx(math.exp(-exact_rate * tree4.t0), abs=3 * ratio * tree4.t0 * series.rate_se)
        # the per-level ratio tends to the mean offspring (k - 1) p
        far = peak_reach(4, 0.25, 31).value / peak_reach(4, 0.25, 30).value
        assert far == pytest.approx(0.75, abs=0.01)

    def test_peak_needs_height_room(self, tree4):
        with pytest.raises(UsageError):
            estimate_peak_survival(tree4, PercConfig.isotropic(tree4, 0.25), 6, 10, Budget(1000, 6))


class TestTriangle:
    def test_matches_ball_sum(self, tree4, within_se):
        config = PercConfig.isotropic(tree4, 0.15, 17)
        result = estimate_triangle(tree4, config, 2000)
        oracle = ball_triangle(4, 0.15, 20)
        assert oracle.details["tail"] < 1e-6
        within_se(result.mean, result.std_error, oracle.value, floor=oracle.error_bound)

    def test_rejects_certain_edges(self, tree4):
        with pytest.raises(UsageError):
            estimate_triangle(tree4, PercConfig.isotropic(tree4, 1.0), 1)


class TestTail:
    def test_critical_tree_tail(self, tree4, within_se):
        p = 1.0 / 3.0
        config = PercConfig.isotropic(tree4, p, 18)
        table = estimate_tail(tree4, config, [1, 10, 100], 2000, Budget(2000, 64))
        survival, errors = table.survival("vertex_count")
        assert survival[0] == 1.0
        oracle = tree_cluster(4, p)
        within_se(survival[1], errors[1], oracle.survival_tail(10).value)
        for result in table.flat():
            lower, upper = result.interval
            assert lower <= upper
            assert result.mean == lower
        assert table.gap_ratio > 1.0
        assert table.gap_ratio_se > 0.0

    def test_oracle_tail_exponent(self):
        curve = tree_cluster(4, 1.0 / 3.0).survival_curve([10, 30, 100, 300, 1000])
        slope, _ = fit_log_log_slope([10, 30, 100, 300, 1000], curve)
        assert slope == pytest.approx(-0.5, abs=0.1)

    def test_tail_fit_uses_range(self, tree4):
        config = PercConfig.isotropic(tree4, 0.2, 19)
        table = estimate_tail(tree4, config, [1, 2, 4, 8], 500)
        slope, _ = fit_tail_exponent(table, "vertex_count", (2, 8))
        assert slope < 0


class TestInequalities:
    @pytest.mark.parametrize(
        "name, p",
        [("tree4", "0.4"), ("product", "tree=0.3,lattice=0.01")],
    )
    def test_alpha_dominates_beta(self, request, name, p):
        model = request.getfixturevalue(name)
        config = PercConfig.parse(model, p, 31)
        budget = Budget(5000, 32)
        alpha = estimate_alpha(model, config, 3, 3000, budget, window=(1, 3))
        beta = estimate_beta(model, config, 3, 3000, DepthRule.fixed(4), budget, window=(1, 3))
        assert not alpha.flagged and not beta.flagged
        assert alpha.fitted_rate >= beta.fitted_rate - 2 * (alpha.rate_se + beta.rate_se)

    @pytest.mark.parametrize("m, n", [(1, 2), (2, 1), (2, 2)])
    def test_first_visit_submultiplicativity(self, product, m, n):
        config = PercConfig.isotropic(product, 0.2, 32)
        budget = Budget(5000, 32)

        def layer_mean(slab, layer):
            values, truncated = collect(product, config, lambda s: (s.count_at(layer),), 3000, slab, budget)
            assert not truncated.any()
            return values[:, 0].mean(), values[:, 0].std(ddof=1) / math.sqrt(len(values))

        whole, whole_se = layer_mean(SlabSpec(0, m + n), m + n)
        first, first_se = layer_mean(SlabSpec(0, m), m)
        # after its first visit to layer m a path may dip back down to layer 0
        rest, rest_se = layer_mean(SlabSpec(-m, n), n)
        combined = math.sqrt(whole_se**2 + (rest * first_se) ** 2 + (first * rest_se) ** 2)
        assert whole <= first * rest + 3 * combined

    @pytest.mark.parametrize("name, p", [("tree4", 0.15), ("product", 0.1)])
    def test_triangle_below_tilted_chi_cubed(self, request, name, p):
        model = request.getfixturevalue(name)
        config = PercConfig.isotropic(model, p, 33)
        triangle = estimate_triangle(model, config, 1500)
        chi = estimate_chi(model, config, 0.5, 3000)
        bound = chi.mean**3
        combined = math.hypot(triangle.std_error, 3 * chi.mean**2 * chi.std_error)
        assert triangle.mean <= bound + 5 * combined
