import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from src.exceptions import DivergenceError, OracleDomainError, UsageError
from src.graph_models import parse_model
from src.oracles import (
    GaltonWatson,
    ball_brute_force,
    ball_chi,
    ball_triangle,
    certified_radius,
    enumerate_ball_chi,
    fixed_end_alpha,
    fixed_end_chi,
    fixed_end_chi_pt_coefficient,
    fixed_end_crossing,
    fixed_end_descendants,
    fixed_end_pcl,
    mean_field_constant,
    oriented_alpha,
    oriented_chi_closed,
    oriented_chi_system,
    oriented_pcl,
    oriented_pt,
    peak_reach,
    tree_cluster,
)

lambdas = st.floats(min_value=-1.0, max_value=2.0, allow_nan=False)
fractions = st.floats(min_value=0.05, max_value=0.95, allow_nan=False)


class TestFixedEndTree:
    def test_thresholds(self):
        assert fixed_end_pcl(4, 0.0).value == pytest.approx(1 / 3)
        assert fixed_end_pcl(4, 0.5).value == pytest.approx(3**-0.5)

    @given(lam=lambdas)
    def test_threshold_symmetry(self, lam):
        assert fixed_end_pcl(4, lam).value == pytest.approx(fixed_end_pcl(4, 1 - lam).value)

    def test_chi_values(self):
        assert fixed_end_chi(4, 0.2, 0.0).value == pytest.approx(3.0)
        assert fixed_end_chi(4, 3**-0.5 - 0.01, 0.5).value == pytest.approx(2260.4, rel=1e-4)
        assert fixed_end_chi(4, 0.0, 0.7).value == 1.0

    @given(lam=lambdas, frac=fractions)
    def test_chi_symmetric_in_lambda(self, lam, frac):
        p = frac * fixed_end_pcl(4, lam).value
        assert fixed_end_chi(4, p, lam).value == pytest.approx(fixed_end_chi(4, p, 1 - lam).value)

    def test_chi_diverges_at_threshold(self):
        with pytest.raises(DivergenceError):
            fixed_end_chi(4, fixed_end_pcl(4, 0.3).value, 0.3)
        with pytest.raises(UsageError):
            fixed_end_chi(2, 0.1, 0.0)

    @pytest.mark.parametrize("d", [3, 4, 5])
    @pytest.mark.parametrize("lam", [-1.0, -0.25, 0.0, 0.5, 0.8, 2.0])
    def test_alpha_at_critical_point(self, d, lam):
        alpha = fixed_end_alpha(d, fixed_end_pcl(d, lam).value).value
        assert alpha == pytest.approx(max(lam, 1 - lam), abs=1e-10)

    def test_crossing_and_descendants(self):
        assert fixed_end_crossing(0.5, 6).value == 0.015625
        assert fixed_end_descendants(4, 0.4, 2).value == pytest.approx(1.44)

    def test_pt_coefficient_and_order(self):
        c = fixed_end_chi_pt_coefficient(4).value
        assert c == pytest.approx(2 / 9)
        pt = 3**-0.5
        for eps in (1e-3, 1e-4):
            assert eps**2 * fixed_end_chi(4, pt - eps, 0.5).value == pytest.approx(c, rel=1e-2)

    def test_mean_field_constant(self):
        result = mean_field_constant(4, 0.0, [0.01, 0.02, 0.05])
        assert result.value > 0
        assert len(result.details["eps_chi"]) == 3
        with pytest.raises(UsageError):
            mean_field_constant(4, 0.0, [0.5])


class TestOrientedTree:
    def test_thresholds(self):
        assert oriented_pcl(0.0).value == pytest.approx(1 / 3)
        assert oriented_pcl(0.5).value == pytest.approx(0.366407, abs=1e-6)
        assert oriented_pt().value == oriented_pcl(0.5).value

    @given(lam=lambdas, frac=fractions)
    @settings(max_examples=200)
    def test_linear_system_matches_closed_form(self, lam, frac):
        p = frac * oriented_pcl(lam).value
        closed = oriented_chi_closed(p, lam).value
        system = oriented_chi_system(p, lam)
        assert system.value == pytest.approx(closed, rel=1e-10)
        assert min(system.details.values()) > 0

    @pytest.mark.parametrize("lam", [-1.0, -0.5, 0.0, 0.25, 0.5, 0.75, 1.0, 2.0])
    def test_alpha_at_critical_point(self, lam):
        alpha = oriented_alpha(oriented_pcl(lam).value).value
        assert alpha == pytest.approx(max(lam, 1 - lam), abs=1e-8)

    def test_alpha_beyond_pt(self):
        with pytest.raises(OracleDomainError):
            oriented_alpha(0.5)

    def test_divergence(self):
        with pytest.raises(DivergenceError):
            oriented_chi_closed(0.4, 0.5)
        with pytest.raises(DivergenceError):
            oriented_chi_system(0.4, 0.5)


class TestGaltonWatson:
    def test_extinction(self):
        assert GaltonWatson(3, 1 / 3).extinction().value == 1.0
        q = GaltonWatson(3, 0.5).extinction()
        assert q.value == pytest.approx(math.sqrt(5) - 2, abs=1e-12)
        assert q.error_bound < 1e-12

    def test_cluster_finite_on_tree(self):
        gw = tree_cluster(4, 0.5)
        q = gw.extinction().value
        assert gw.cluster_finite().value == pytest.approx((0.5 + 0.5 * q) ** 4)

    def test_reach_generation(self):
        gw = GaltonWatson(3, 0.25)
        assert gw.reach_generation(0).value == 1.0
        assert gw.reach_generation(1).value == pytest.approx(1 - 0.75**3)
        values = [gw.reach_generation(k).value for k in range(1, 8)]
        assert all(a > b for a, b in zip(values, values[1:]))

    def test_peak_reach(self):
        assert peak_reach(4, 0.25, 1).value == pytest.approx(0.75 * (1 - 0.75**3))

    @pytest.mark.parametrize("p", [0.1, 1 / 3, 0.5])
    def test_lagrange_matches_power_series(self, p):
        gw = tree_cluster(4, p)
        np.testing.assert_allclose(gw.progeny_pmf(40), gw.progeny_pmf_series(40), atol=1e-13)

    def test_progeny_law(self):
        gw = tree_cluster(4, 0.2)
        pmf = gw.progeny_pmf(400)
        assert pmf[0] == 0.0
        assert pmf[1] == pytest.approx(0.8**4)
        assert pmf.sum() == pytest.approx(1.0, abs=1e-10)
        mean = float(np.arange(401) @ pmf)
        assert mean == pytest.approx(fixed_end_chi(4, 0.2, 0.0).value, rel=1e-8)

    def test_survival(self):
        gw = tree_cluster(4, 1 / 3)
        assert gw.survival_tail(1).value == 1.0
        curve = gw.survival_curve([1, 10, 100])
        assert curve[0] == 1.0
        assert curve[1] == pytest.approx(gw.survival_tail(10).value, abs=1e-12)
        assert curve[1] > curve[2] > 0


class TestBallSums:
    def test_fixed_end_ball_matches_closed_form(self, tree4):
        ball = ball_chi(tree4, 0.2, 0.0, 60)
        exact = fixed_end_chi(4, 0.2, 0.0).value
        assert abs(ball.value - exact) <= ball.error_bound + 1e-12
        assert ball.details["tail"] < 1e-10

    @pytest.mark.parametrize("lam", [0.0, 0.3, 0.5])
    def test_tilted_ball(self, tree4, lam):
        ball = ball_chi(tree4, 0.2, lam, 120)
        assert ball.value == pytest.approx(fixed_end_chi(4, 0.2, lam).value, abs=ball.error_bound + 1e-12)

    def test_oriented_ball(self, oriented):
        ball = ball_chi(oriented, 0.15, 0.7, 80)
        assert ball.value == pytest.approx(oriented_chi_closed(0.15, 0.7).value, abs=ball.error_bound + 1e-12)

    @pytest.mark.parametrize("text", ["fixed-end-tree:k=4", "oriented-tree-112"])
    def test_enumeration_matches_transfer_matrix(self, text):
        model = parse_model(text)
        ball = ball_chi(model, 0.3, 0.4, 5)
        assert enumerate_ball_chi(model, 0.3, 0.4, 5) == pytest.approx(ball.value, rel=1e-12)

    def test_divergent_ball(self, tree4):
        with pytest.raises(OracleDomainError):
            ball_chi(tree4, 0.5, 0.0, 10)

    def test_triangle(self):
        assert ball_triangle(4, 0.0, 3).value == 1.0
        small = ball_triangle(4, 0.15, 20)
        assert small.details["tail"] < 1e-6
        assert small.value < fixed_end_chi(4, 0.15, 0.5).value ** 3
        with pytest.raises(OracleDomainError):
            ball_triangle(4, 0.6, 10)

    def test_brute_force_dispatch(self, tree4, product):
        assert ball_brute_force(tree4, 10, "chi", 0.2).value == ball_chi(tree4, 0.2, 0.0, 10).value
        with pytest.raises(UsageError):
            ball_brute_force(product, 10, "chi", 0.2)
        with pytest.raises(UsageError):
            ball_brute_force(tree4, 10, "square", 0.2)

    def test_certified_radius(self, tree4):
        radius = certified_radius(tree4, 0.2, 0.0, 1e-9)
        assert ball_chi(tree4, 0.2, 0.0, radius).details["tail"] < 1e-9
        assert ball_chi(tree4, 0.2, 0.0, radius - 1).details["tail"] >= 1e-9

    def test_certified_triangle_radius(self, tree4, oriented):
        radius = certified_radius(tree4, 0.15, 0.0, 1e-6, integrand="triangle")
        assert ball_triangle(4, 0.15, radius).details["tail"] < 1e-6
        assert ball_triangle(4, 0.15, radius - 1).details["tail"] >= 1e-6
        assert certified_radius(oriented, 0.15, 0.7, 1e-6, integrand="triangle") == radius
        assert math.isinf(ball_triangle(4, 0.55, 0).details["tail"])
        with pytest.raises(OracleDomainError):
            certified_radius(tree4, 0.6, 0.0, 1e-6, integrand="triangle")

    def test_progeny_matches_pmf(self):
        gw = GaltonWatson(3, 0.3, root_trials=4)
        pmf = gw.progeny_pmf(12)
        assert [gw.progeny(n).value for n in range(13)] == pytest.approx(list(pmf))
        assert gw.progeny(0).value == 0.0
