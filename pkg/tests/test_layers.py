import math
from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from src.exceptions import UsageError
from src.layers import UNBOUNDED, LayerFrame, SlabSpec, draw_offset, in_slab, layer_index, make_frame


class TestSlabSpec:
    def test_parse_bounds(self):
        slab = SlabSpec.parse("-inf:6")
        assert slab.lo == -math.inf
        assert slab.hi == 6
        assert str(slab) == "-inf:6"
        assert SlabSpec.parse("-inf:+inf").is_unbounded
        assert UNBOUNDED.is_unbounded

    def test_contains_is_inclusive(self):
        slab = SlabSpec(-2, 3)
        assert slab.contains(-2) and slab.contains(3)
        assert not slab.contains(4)

    @pytest.mark.parametrize("text", ["3:1", "0-6", "a:b", "1.5:2"])
    def test_rejects_bad_slabs(self, text):
        with pytest.raises(UsageError):
            SlabSpec.parse(text)


class TestLayerFrame:
    def test_simple_layers_are_heights(self, tree4):
        frame = make_frame(tree4, 0, seed=11)
        assert [frame.layer_index(h) for h in (-3, 0, 5)] == [-3, 0, 5]
        assert layer_index(frame, 2) == 2
        assert in_slab(frame, 2, SlabSpec(0, 2))
        assert not in_slab(frame, 3, SlabSpec(0, 2))

    def test_half_scale_layers_hold_two_levels(self, grandparent):
        frame = LayerFrame(0, 0.3, grandparent.t0, grandparent.layer_scale)
        assert [frame.layer_index(h) for h in (-2, -1, 0, 1, 2, 3)] == [-1, 0, 0, 1, 1, 2]
        counts = Counter(frame.layer_index(h) for h in range(-21, 21))
        assert all(c == 2 for c in counts.values())

    @given(
        offset=st.sampled_from([0.1, 0.3, 0.55, 0.9]),
        anchor=st.integers(-20, 20),
        other=st.integers(-20, 20),
    )
    @settings(max_examples=200, deadline=None)
    def test_reanchor_is_shift_coherent(self, offset, anchor, other):
        frame = LayerFrame(0, offset, 2 * math.log(2), 0.5)
        moved = frame.reanchor(anchor)
        assert 0.0 <= moved.offset < 1.0
        assert moved.layer_index(other) == frame.layer_index(other) - frame.layer_index(anchor)

    def test_offset_is_deterministic(self):
        assert draw_offset(5) == draw_offset(5)
        assert draw_offset(5) != draw_offset(6)
        assert 0.0 < draw_offset(5) < 1.0
