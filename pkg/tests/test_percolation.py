import numpy as np
import pytest

from src.estimators.sampling import collect
from src.exceptions import UsageError
from src.graph_models import EdgeOrbit
from src.layers import SlabSpec
from src.percolation import (
    Budget,
    EdgeCoins,
    PercConfig,
    TruncationReason,
    explore_cluster,
    explore_coupled,
    explore_slab_ladder,
    sample_rng,
    sample_seed,
)


class TestStreams:
    def test_sample_streams_are_reproducible(self):
        a = sample_rng(sample_seed(7, 3)).random(4)
        b = sample_rng(sample_seed(7, 3)).random(4)
        c = sample_rng(sample_seed(7, 4)).random(4)
        np.testing.assert_array_equal(a, b)
        assert not np.array_equal(a, c)

    def test_negative_master_seed_is_masked(self):
        a = sample_rng(sample_seed(-1, 0)).random()
        b = sample_rng(sample_seed((1 << 64) - 1, 0)).random()
        assert a == b

    def test_coins_are_memoized_and_coupled(self):
        coins = EdgeCoins(sample_rng(sample_seed(1, 0)), block=4)
        keys = [(i, i + 1) for i in range(10)]
        first = [coins.uniform(k) for k in keys]
        assert [coins.uniform(k) for k in keys] == first
        assert len(coins) == 10
        for k in keys:
            assert not coins.is_open(k, 0.0)
            assert coins.is_open(k, 1.0)
            if coins.is_open(k, 0.3):
                assert coins.is_open(k, 0.6)

    def test_fresh_coins_are_independent(self):
        coins = EdgeCoins(sample_rng(sample_seed(1, 0)))
        other = coins.fresh()
        assert other.uniform((0, 1)) != coins.uniform((0, 1))


class TestPercConfig:
    def test_parse_isotropic_and_orbits(self, tree4, product):
        assert PercConfig.parse(tree4, "0.2").describe() == 0.2
        config = PercConfig.parse(product, "tree=0.3,lattice=0.01", 5)
        assert config.probabilities[EdgeOrbit.LATTICE] == 0.01
        assert config.master_seed == 5
        assert not config.is_isotropic

    @pytest.mark.parametrize("text", ["1.5", "tree=0.3", "tree=0.3,ladder=0.1", "abc"])
    def test_parse_rejects(self, product, text):
        with pytest.raises(UsageError):
            PercConfig.parse(product, text)


class TestExplorer:
    def test_closed_edges_leave_singleton(self, tree4):
        sample = explore_cluster(tree4, None, PercConfig.isotropic(tree4, 0.0, 1))
        assert sample.vertex_count == 1
        assert sample.is_peak
        assert sample.level_counts == {0: 1}
        assert sample.intrinsic_radius == 0
        assert not sample.truncated

    def test_vertex_budget(self, tree4):
        sample = explore_cluster(tree4, None, PercConfig.isotropic(tree4, 1.0, 1), budget=Budget(50, 64))
        assert sample.truncated
        assert sample.truncation_reason is TruncationReason.VERTEX_BUDGET
        assert sample.vertex_count == 50

    def test_height_budget_in_upper_half_space(self, tree4):
        sample = explore_cluster(
            tree4, None, PercConfig.isotropic(tree4, 1.0, 1), SlabSpec(0, np.inf), Budget(100000, 5)
        )
        assert sample.truncation_reason is TruncationReason.HEIGHT_BUDGET
        assert sample.vertex_count == sum(3**j for j in range(6))
        assert sample.max_height == 5
        assert sample.min_height == 0
        assert sample.level_counts[5] == 1

    def test_same_index_same_cluster(self, product):
        config = PercConfig.isotropic(product, 0.15, 42)
        a = explore_cluster(product, None, config, sample_index=9)
        b = explore_cluster(product, None, config, sample_index=9)
        assert a == b

    def test_tilted_volume(self, tree4):
        config = PercConfig.isotropic(tree4, 0.3, 2)
        for index in range(20):
            sample = explore_cluster(tree4, None, config, sample_index=index)
            assert sample.tilted_volume(0.0) == sample.vertex_count
            expected = sum(c * 3.0 ** (0.5 * h) for h, c in sample.height_counts.items())
            assert sample.tilted_volume(0.5) == pytest.approx(expected)

    def test_coupled_clusters_are_nested(self, product):
        maps = [
            {EdgeOrbit.TREE: 0.2, EdgeOrbit.LATTICE: 0.1},
            {EdgeOrbit.TREE: 0.3, EdgeOrbit.LATTICE: 0.1},
            {EdgeOrbit.TREE: 0.3, EdgeOrbit.LATTICE: 0.2},
        ]
        for index in range(30):
            small, middle, large = explore_coupled(product, maps, 3, budget=Budget(2000, 64), sample_index=index)
            assert small.vertex_count <= middle.vertex_count <= large.vertex_count
            if not large.truncated:
                assert small.max_height <= middle.max_height <= large.max_height

    def test_slab_ladder_is_nested(self, product):
        config = PercConfig.isotropic(product, 0.2, 6)
        slabs = [SlabSpec(-2, 3), SlabSpec(-4, 3), SlabSpec(-8, 3)]
        for index in range(30):
            ladder = explore_slab_ladder(product, config, slabs, Budget(2000, 64), index)
            assert ladder[0] == explore_cluster(product, None, config, slabs[0], Budget(2000, 64), index)
            if any(s.truncated for s in ladder):
                continue
            counts = [s.vertex_count for s in ladder]
            assert counts == sorted(counts)
            reached = [s.count_at(3) for s in ladder]
            assert reached == sorted(reached)

    def test_peak_means_parent_edge_closed(self, tree4):
        config = PercConfig.isotropic(tree4, 0.25, 8)
        for index in range(40):
            sample = explore_cluster(tree4, None, config, sample_index=index)
            assert sample.is_peak == (sample.max_height == 0)

    def test_results_independent_of_threads(self, tree4):
        config = PercConfig.isotropic(tree4, 0.3, 99)

        def stat(sample):
            return (sample.vertex_count, sample.max_height)

        serial, trunc_serial = collect(tree4, config, stat, 64, threads=1, block_size=16)
        parallel, trunc_parallel = collect(tree4, config, stat, 64, threads=2, block_size=16)
        np.testing.assert_array_equal(serial, parallel)
        np.testing.assert_array_equal(trunc_serial, trunc_parallel)

    def test_slab_crossing_probability(self, tree4, within_se):
        config = PercConfig.isotropic(tree4, 0.5, 2024)
        values, _ = collect(tree4, config, lambda s: (s.reaches(6),), 4000, SlabSpec(0, 6))
        mean = values[:, 0].mean()
        se = values[:, 0].std(ddof=1) / np.sqrt(len(values))
        within_se(mean, se, 0.5**6)
