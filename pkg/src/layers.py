# src/layers.py - Uniform separating layer decomposition

import logging
import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from src.exceptions import UsageError
from src.graph_models import GraphModel

logger = logging.getLogger(__name__)

# spawn-key stream reserved for layer offsets
FRAME_STREAM = 1

Seed = Union[int, np.random.SeedSequence]


@dataclass(frozen=True)
class SlabSpec:
    """Band of layers lo..hi (inclusive); either end may be infinite"""

    lo: float = -math.inf
    hi: float = math.inf

    def __post_init__(self) -> None:
        if self.lo > self.hi:
            raise UsageError(f"Empty slab [{self.lo}, {self.hi}]")

    @classmethod
    def parse(cls, text: str) -> "SlabSpec":
        """Parse ``lo:hi`` with ``-inf``/``+inf`` literals"""
        lo_raw, sep, hi_raw = text.strip().partition(":")
        if not sep:
            raise UsageError(f"Slab must look like lo:hi, got '{text}'")

        def bound(raw: str) -> float:
            raw = raw.strip().lower()
            if raw in ("-inf", "+inf", "inf"):
                return -math.inf if raw.startswith("-") else math.inf
            try:
                return int(raw)
            except ValueError as e:
                raise UsageError(f"Slab bound must be an integer or ±inf, got '{raw}'") from e

        return cls(bound(lo_raw), bound(hi_raw))

    @property
    def is_unbounded(self) -> bool:
        return self.lo == -math.inf and self.hi == math.inf

    def contains(self, layer: int) -> bool:
        return self.lo <= layer <= self.hi

    def __str__(self) -> str:
        def fmt(x: float) -> str:
            if math.isinf(x):
                return "-inf" if x < 0 else "+inf"
            return str(int(x))

        return f"{fmt(self.lo)}:{fmt(self.hi)}"


UNBOUNDED = SlabSpec()


@dataclass(frozen=True)
class LayerFrame:
    """Layers L_n relative to an anchor vertex with uniform offset U in (0, 1).

    A vertex x lies in L_n when (n + U - 1) <= normalized height of x <= (n + U),
    where the normalized height is (height(x) - anchor_height) * layer_scale.
    """

    anchor_height: int
    offset: float
    t0: float
    layer_scale: float = 1.0

    def layer_index(self, height: int) -> int:
        if self.layer_scale == 1.0:
            return height - self.anchor_height
        return math.ceil((height - self.anchor_height) * self.layer_scale - self.offset)

    def in_slab(self, height: int, slab: SlabSpec) -> bool:
        return slab.contains(self.layer_index(height))

    def reanchor(self, height: int) -> "LayerFrame":
        """Frame of a vertex at the given height: U_u = U_v - normalized height of u (mod 1)"""
        shifted = (self.offset - (height - self.anchor_height) * self.layer_scale) % 1.0
        return LayerFrame(height, shifted, self.t0, self.layer_scale)


def draw_offset(seed: Seed) -> float:
    """Uniform offset in the open interval (0, 1), deterministic in seed"""
    if isinstance(seed, np.random.SeedSequence):
        sequence = np.random.SeedSequence(
            seed.entropy, spawn_key=tuple(seed.spawn_key) + (FRAME_STREAM,)
        )
    else:
        sequence = np.random.SeedSequence(seed, spawn_key=(FRAME_STREAM,))
    rng = np.random.default_rng(sequence)
    offset = 0.0
    while offset == 0.0:
        offset = float(rng.random())
    return offset


def make_frame(model: GraphModel, origin_height: int = 0, seed: Seed = 0) -> LayerFrame:
    """Layer frame anchored at the origin with an offset drawn from seed"""
    return LayerFrame(origin_height, draw_offset(seed), model.t0, model.layer_scale)


def layer_index(frame: LayerFrame, height: int) -> int:
    return frame.layer_index(height)


def in_slab(frame: LayerFrame, height: int, slab: SlabSpec) -> bool:
    return frame.in_slab(height, slab)
