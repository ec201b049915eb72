# src/percolation/explorer.py - Budgeted breadth-first exploration of open clusters

import enum
import logging
import math
from collections import Counter, deque
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Union

from src.exceptions import UsageError
from src.graph_models import EdgeOrbit, GraphModel, VertexRegistry, edge_key
from src.layers import UNBOUNDED, LayerFrame, SlabSpec, make_frame
from src.percolation.streams import EdgeCoins, sample_rng, sample_seed

logger = logging.getLogger(__name__)


class TruncationReason(enum.Enum):
    NONE = "none"
    VERTEX_BUDGET = "vertex_budget"
    HEIGHT_BUDGET = "height_budget"


@dataclass(frozen=True)
class Budget:
    max_vertices: int = 100000
    max_abs_height: int = 64

    def __post_init__(self) -> None:
        if self.max_vertices < 1 or self.max_abs_height < 1:
            raise UsageError(f"Budgets must be positive, got {self}")


@dataclass(frozen=True)
class PercConfig:
    """Retention probability per edge orbit plus the master seed"""

    probabilities: Mapping[EdgeOrbit, float]
    master_seed: int = 0

    @classmethod
    def isotropic(cls, model: GraphModel, p: float, master_seed: int = 0) -> "PercConfig":
        return cls.for_model(model, {orbit: p for orbit in model.orbits}, master_seed)

    @classmethod
    def for_model(
        cls, model: GraphModel, probabilities: Mapping[EdgeOrbit, float], master_seed: int = 0
    ) -> "PercConfig":
        missing = [o.value for o in model.orbits if o not in probabilities]
        if missing:
            raise UsageError(f"No probability given for orbit(s) {missing} of {model}")
        for orbit, p in probabilities.items():
            if not 0.0 <= p <= 1.0:
                raise UsageError(f"Probability for {orbit.value} must lie in [0, 1], got {p}")
        return cls(dict(probabilities), master_seed)

    @classmethod
    def parse(cls, model: GraphModel, text: str, master_seed: int = 0) -> "PercConfig":
        """``0.2`` (isotropic) or ``tree=0.3,lattice=0.01``"""
        text = text.strip()
        if "=" not in text:
            try:
                return cls.isotropic(model, float(text), master_seed)
            except ValueError as e:
                raise UsageError(f"Bad probability '{text}'") from e
        names = {o.value: o for o in model.orbits}
        probabilities: Dict[EdgeOrbit, float] = {}
        for item in text.split(","):
            name, _, raw = item.partition("=")
            name = name.strip()
            if name not in names:
                raise UsageError(f"Orbit '{name}' not in {model}; orbits: {sorted(names)}")
            try:
                probabilities[names[name]] = float(raw)
            except ValueError as e:
                raise UsageError(f"Bad probability '{raw}' for orbit {name}") from e
        return cls.for_model(model, probabilities, master_seed)

    @property
    def is_isotropic(self) -> bool:
        return len(set(self.probabilities.values())) <= 1

    def describe(self) -> Union[float, Dict[str, float]]:
        if self.is_isotropic:
            return next(iter(self.probabilities.values()))
        return {o.value: p for o, p in sorted(self.probabilities.items(), key=lambda kv: kv[0].value)}

    def max_probability(self) -> float:
        return max(self.probabilities.values())


@dataclass
class ExplorationTrace:
    """Raw result of one exploration: reached ids in BFS order with hop depths"""

    order: List[int]
    depth: Dict[int, int]
    truncation: TruncationReason = TruncationReason.NONE

    @property
    def truncated(self) -> bool:
        return self.truncation is not TruncationReason.NONE


@dataclass
class ClusterSample:
    """One percolation exploration from the origin"""

    vertex_count: int
    level_counts: Dict[int, int]
    height_counts: Dict[int, int]
    height_unit: float
    is_peak: bool
    max_height: int
    min_height: int
    extrinsic_radius: int
    intrinsic_radius: int
    truncated: bool
    truncation_reason: TruncationReason
    offset: float = field(default=0.5)

    def tilted_volume(self, lam: float) -> float:
        """Sum of Delta(origin, x)^lam over reached vertices"""
        if lam == 0.0:
            return float(self.vertex_count)
        scale = lam * self.height_unit
        return math.fsum(count * math.exp(scale * h) for h, count in self.height_counts.items())

    def reaches(self, layer: int) -> bool:
        return self.level_counts.get(layer, 0) > 0

    def count_at(self, layer: int) -> int:
        return self.level_counts.get(layer, 0)


class ClusterExplorer:
    """Explores open clusters inside a slab with hard vertex and height budgets"""

    def __init__(
        self,
        registry: VertexRegistry,
        frame: LayerFrame,
        probabilities: Mapping[EdgeOrbit, float],
        slab: SlabSpec = UNBOUNDED,
        budget: Budget = Budget(),
    ):
        self.registry = registry
        self.frame = frame
        self.probabilities = probabilities
        self.slab = slab
        self.budget = budget

    def explore(self, start: int, coins: EdgeCoins, max_vertices: Optional[int] = None) -> ExplorationTrace:
        registry = self.registry
        probabilities = self.probabilities
        frame = self.frame
        slab = self.slab
        bounded = not slab.is_unbounded
        height_cap = self.budget.max_abs_height
        vertex_cap = self.budget.max_vertices if max_vertices is None else max_vertices

        depth = {start: 0}
        order = [start]
        queue = deque([start])
        truncation = TruncationReason.NONE
        while queue:
            x = queue.popleft()
            next_depth = depth[x] + 1
            for y, orbit, _ in registry.neighbor_ids(x):
                if y in depth:
                    continue
                height = registry.height(y)
                if bounded and not slab.contains(frame.layer_index(height)):
                    continue
                if not coins.is_open(edge_key(x, y), probabilities[orbit]):
                    continue
                if abs(height) > height_cap:
                    truncation = TruncationReason.HEIGHT_BUDGET
                    continue
                if len(order) >= vertex_cap:
                    return ExplorationTrace(order, depth, TruncationReason.VERTEX_BUDGET)
                depth[y] = next_depth
                order.append(y)
                queue.append(y)
        return ExplorationTrace(order, depth, truncation)

    def summarize(self, trace: ExplorationTrace) -> ClusterSample:
        """ClusterSample of a trace started at the origin"""
        registry = self.registry
        frame = self.frame
        heights = [registry.height(v) for v in trace.order]
        height_counts = Counter(heights)
        level_counts: Counter = Counter()
        for h, count in height_counts.items():
            level_counts[frame.layer_index(h)] += count
        others = heights[1:]
        return ClusterSample(
            vertex_count=len(trace.order),
            level_counts=dict(level_counts),
            height_counts=dict(height_counts),
            height_unit=registry.model.height_unit,
            is_peak=all(h < heights[0] for h in others),
            max_height=max(heights),
            min_height=min(heights),
            extrinsic_radius=max(registry.distance_from_origin(v) for v in trace.order),
            intrinsic_radius=max(trace.depth[v] for v in trace.order),
            truncated=trace.truncated,
            truncation_reason=trace.truncation,
            offset=frame.offset,
        )


def explore_cluster(
    model: GraphModel,
    frame: Optional[LayerFrame],
    config: PercConfig,
    slab: SlabSpec = UNBOUNDED,
    budget: Budget = Budget(),
    sample_index: int = 0,
) -> ClusterSample:
    """Explore the open cluster of the origin inside a slab for one sample.

    Deterministic in (config.master_seed, sample_index). With frame=None the
    layer offset is drawn from the sample's own stream.
    """
    seed = sample_seed(config.master_seed, sample_index)
    if frame is None:
        frame = make_frame(model, 0, seed)
    registry = model.new_registry()
    explorer = ClusterExplorer(registry, frame, config.probabilities, slab, budget)
    trace = explorer.explore(0, EdgeCoins(sample_rng(seed)))
    return explorer.summarize(trace)


def explore_coupled(
    model: GraphModel,
    probability_maps: Sequence[Mapping[EdgeOrbit, float]],
    master_seed: int,
    slab: SlabSpec = UNBOUNDED,
    budget: Budget = Budget(),
    sample_index: int = 0,
    frame: Optional[LayerFrame] = None,
) -> List[ClusterSample]:
    """Clusters of the origin at several probability vectors from one uniform per edge"""
    seed = sample_seed(master_seed, sample_index)
    if frame is None:
        frame = make_frame(model, 0, seed)
    registry = model.new_registry()
    coins = EdgeCoins(sample_rng(seed))
    samples = []
    for probabilities in probability_maps:
        explorer = ClusterExplorer(registry, frame, probabilities, slab, budget)
        samples.append(explorer.summarize(explorer.explore(0, coins)))
    return samples


def explore_slab_ladder(
    model: GraphModel,
    config: PercConfig,
    slabs: Sequence[SlabSpec],
    budget: Budget = Budget(),
    sample_index: int = 0,
    frame: Optional[LayerFrame] = None,
) -> List[ClusterSample]:
    """Clusters of the origin inside several slabs from one configuration.

    Registry, layer frame and edge coins are shared, so an edge open in one
    slab is open in every slab that contains both its ends, and the first
    slab reproduces explore_cluster for the same sample.
    """
    seed = sample_seed(config.master_seed, sample_index)
    if frame is None:
        frame = make_frame(model, 0, seed)
    registry = model.new_registry()
    coins = EdgeCoins(sample_rng(seed))
    samples = []
    for slab in slabs:
        explorer = ClusterExplorer(registry, frame, config.probabilities, slab, budget)
        samples.append(explorer.summarize(explorer.explore(0, coins)))
    return samples
