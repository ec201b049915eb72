# src/graph_models/registry.py - Lazy canonical vertex materialization
#
# Every registry grows a connected set of vertices outward from the origin, so
# the vertex through which a vertex was first created is its neighbour on a
# geodesic of the underlying tree back to the origin. Tree distances follow
# from these "via" pointers without any global coordinates.

import itertools
import logging
import math
from collections import deque
from dataclasses import dataclass
from typing import Dict, List, Tuple

from src.exceptions import GraphModelError
from src.graph_models.models import EdgeOrbit, Family, GraphModel

logger = logging.getLogger(__name__)

Neighbor = Tuple[int, EdgeOrbit, int]

_registry_tokens = itertools.count(1)


@dataclass(frozen=True)
class VertexHandle:
    """Canonical identity of a materialized vertex"""

    id: int
    height: int
    coords: tuple
    registry_token: int


class _EndTree:
    """Lazily grown k-regular tree with a fixed end: one parent slot, k-1 child slots.

    The parent of a freshly materialized vertex receives it in child slot 0.
    """

    def __init__(self, k: int):
        self.k = k
        self.up: List[int] = [-1]
        self.down: List[List[int]] = [[-1] * (k - 1)]
        self.height: List[int] = [0]
        self.via: List[int] = [-1]
        self.dist0: List[int] = [0]
        self.move: List[str] = [""]

    def __len__(self) -> int:
        return len(self.height)

    def _new(self, height: int, via: int, move: str) -> int:
        node = len(self.height)
        self.up.append(-1)
        self.down.append([-1] * (self.k - 1))
        self.height.append(height)
        self.via.append(via)
        self.dist0.append(self.dist0[via] + 1)
        self.move.append(move)
        return node

    def parent(self, t: int) -> int:
        if self.up[t] < 0:
            node = self._new(self.height[t] + 1, t, "U")
            self.down[node][0] = t
            self.up[t] = node
        return self.up[t]

    def child(self, t: int, j: int) -> int:
        if self.down[t][j] < 0:
            node = self._new(self.height[t] - 1, t, f"D{j}")
            self.up[node] = t
            self.down[t][j] = node
        return self.down[t][j]

    def distance(self, a: int, b: int) -> int:
        return _via_distance(self.via, self.dist0, a, b)

    def address(self, t: int) -> Tuple[str, ...]:
        return _via_address(self.via, self.move, t)


class _OrientedTree:
    """Lazily grown 4-regular tree with a (1,1,2)-orientation.

    Slots per vertex: out (oriented edge up), two in-edges (down), one partner
    across the unoriented edge. Partners share a height.
    """

    def __init__(self) -> None:
        self.out: List[int] = [-1]
        self.ins: List[List[int]] = [[-1, -1]]
        self.partner: List[int] = [-1]
        self.height: List[int] = [0]
        self.via: List[int] = [-1]
        self.dist0: List[int] = [0]
        self.move: List[str] = [""]

    def __len__(self) -> int:
        return len(self.height)

    def _new(self, height: int, via: int, move: str) -> int:
        node = len(self.height)
        self.out.append(-1)
        self.ins.append([-1, -1])
        self.partner.append(-1)
        self.height.append(height)
        self.via.append(via)
        self.dist0.append(self.dist0[via] + 1)
        self.move.append(move)
        return node

    def parent(self, t: int) -> int:
        if self.out[t] < 0:
            node = self._new(self.height[t] + 1, t, "U")
            self.ins[node][0] = t
            self.out[t] = node
        return self.out[t]

    def child(self, t: int, j: int) -> int:
        if self.ins[t][j] < 0:
            node = self._new(self.height[t] - 1, t, f"D{j}")
            self.out[node] = t
            self.ins[t][j] = node
        return self.ins[t][j]

    def mate(self, t: int) -> int:
        if self.partner[t] < 0:
            node = self._new(self.height[t], t, "P")
            self.partner[node] = t
            self.partner[t] = node
        return self.partner[t]

    def distance(self, a: int, b: int) -> int:
        return _via_distance(self.via, self.dist0, a, b)

    def address(self, t: int) -> Tuple[str, ...]:
        return _via_address(self.via, self.move, t)


def _via_distance(via: List[int], dist0: List[int], a: int, b: int) -> int:
    da, db = dist0[a], dist0[b]
    steps = 0
    while da > db:
        a = via[a]
        da -= 1
        steps += 1
    while db > da:
        b = via[b]
        db -= 1
        steps += 1
    while a != b:
        a = via[a]
        b = via[b]
        steps += 2
    return steps


def _via_address(via: List[int], move: List[str], t: int) -> Tuple[str, ...]:
    word: List[str] = []
    while via[t] >= 0:
        word.append(move[t])
        t = via[t]
    return tuple(reversed(word))


class VertexRegistry:
    """Single-writer registry of materialized vertices with dense integer ids.

    Ids are canonical within one registry: every abstract vertex is created
    exactly once, whatever path reaches it first. Vertex 0 is the origin.
    """

    def __init__(self, model: GraphModel):
        self.model = model
        self.token = next(_registry_tokens)
        self._adjacency: List[List[Neighbor]] = []
        self._heights: List[int] = []

    # -- model-specific hooks -------------------------------------------------

    def _build_neighbors(self, vid: int) -> List[Neighbor]:
        raise NotImplementedError

    def distance_from_origin(self, vid: int) -> int:
        raise NotImplementedError

    def _distance(self, u: int, v: int) -> int:
        raise NotImplementedError

    def _coords(self, vid: int) -> tuple:
        raise NotImplementedError

    # -- integer-id fast path -------------------------------------------------

    def _register(self, height: int) -> int:
        vid = len(self._heights)
        self._heights.append(height)
        self._adjacency.append([])
        return vid

    def __len__(self) -> int:
        return len(self._heights)

    def height(self, vid: int) -> int:
        return self._heights[vid]

    def neighbor_ids(self, vid: int) -> List[Neighbor]:
        """(neighbour id, orbit, height delta) for every edge at vid, materializing lazily"""
        cached = self._adjacency[vid]
        if not cached:
            cached = self._build_neighbors(vid)
            self._adjacency[vid] = cached
        return cached

    # -- handle API -----------------------------------------------------------

    def handle(self, vid: int) -> VertexHandle:
        return VertexHandle(vid, self._heights[vid], self._coords(vid), self.token)

    def _check(self, v: VertexHandle) -> int:
        if v.registry_token != self.token or not 0 <= v.id < len(self._heights):
            raise GraphModelError(f"Vertex handle {v.id} does not belong to this {self.model} registry")
        return v.id

    def origin(self) -> VertexHandle:
        return self.handle(0)

    def neighbors(self, v: VertexHandle) -> List[Tuple[VertexHandle, EdgeOrbit, int]]:
        vid = self._check(v)
        return [(self.handle(u), orbit, delta) for u, orbit, delta in self.neighbor_ids(vid)]

    def graph_distance(self, u: VertexHandle, v: VertexHandle) -> int:
        return self._distance(self._check(u), self._check(v))

    def edge_key(self, u: VertexHandle, v: VertexHandle) -> Tuple[int, int]:
        a, b = self._check(u), self._check(v)
        if not any(w == b for w, _, _ in self.neighbor_ids(a)):
            raise GraphModelError(f"Vertices {a} and {b} are not adjacent in {self.model}")
        return (a, b) if a < b else (b, a)

    def modular(self, u: VertexHandle, v: VertexHandle) -> float:
        """Delta(u, v) = exp(height_unit * (height(v) - height(u)))"""
        a, b = self._check(u), self._check(v)
        return math.exp(self.model.height_unit * (self._heights[b] - self._heights[a]))

    def bfs_distance(self, u: int, v: int, max_vertices: int = 100000) -> int:
        """Breadth-first graph distance, materializing at most max_vertices vertices"""
        if u == v:
            return 0
        seen = {u: 0}
        queue = deque([u])
        while queue:
            x = queue.popleft()
            for y, _, _ in self.neighbor_ids(x):
                if y in seen:
                    continue
                seen[y] = seen[x] + 1
                if y == v:
                    return seen[y]
                if len(seen) > max_vertices:
                    raise GraphModelError(f"BFS distance exceeded {max_vertices} vertices")
                queue.append(y)
        raise GraphModelError(f"Vertex {v} unreachable from {u}")


def edge_key(u: int, v: int) -> Tuple[int, int]:
    """Unchecked canonical key of the edge between two adjacent vertex ids"""
    return (u, v) if u < v else (v, u)


class FixedEndTreeRegistry(VertexRegistry):
    def __init__(self, model: GraphModel):
        super().__init__(model)
        self.tree = _EndTree(model.k)
        self._register(0)

    def _sync(self) -> None:
        while len(self._heights) < len(self.tree):
            self._register(self.tree.height[len(self._heights)])

    def _build_neighbors(self, vid: int) -> List[Neighbor]:
        tree = self.tree
        result: List[Neighbor] = [(tree.parent(vid), EdgeOrbit.TREE, 1)]
        for j in range(self.model.k - 1):
            result.append((tree.child(vid, j), EdgeOrbit.TREE, -1))
        self._sync()
        return result

    def distance_from_origin(self, vid: int) -> int:
        return self.tree.dist0[vid]

    def _distance(self, u: int, v: int) -> int:
        return self.tree.distance(u, v)

    def _coords(self, vid: int) -> tuple:
        return (self.tree.address(vid),)


class OrientedTreeRegistry(VertexRegistry):
    def __init__(self, model: GraphModel):
        super().__init__(model)
        self.tree = _OrientedTree()
        self._register(0)

    def _sync(self) -> None:
        while len(self._heights) < len(self.tree):
            self._register(self.tree.height[len(self._heights)])

    def _build_neighbors(self, vid: int) -> List[Neighbor]:
        tree = self.tree
        result: List[Neighbor] = [
            (tree.parent(vid), EdgeOrbit.ORIENTED, 1),
            (tree.child(vid, 0), EdgeOrbit.ORIENTED, -1),
            (tree.child(vid, 1), EdgeOrbit.ORIENTED, -1),
            (tree.mate(vid), EdgeOrbit.UNORIENTED, 0),
        ]
        self._sync()
        return result

    def distance_from_origin(self, vid: int) -> int:
        return self.tree.dist0[vid]

    def _distance(self, u: int, v: int) -> int:
        return self.tree.distance(u, v)

    def _coords(self, vid: int) -> tuple:
        return (self.tree.address(vid),)


class TreeTimesLatticeRegistry(VertexRegistry):
    """T_k x Z^d: vertices are (tree node, lattice point) pairs"""

    def __init__(self, model: GraphModel):
        super().__init__(model)
        self.tree = _EndTree(model.k)
        self._index: Dict[Tuple[int, Tuple[int, ...]], int] = {}
        self._node: List[int] = []
        self._point: List[Tuple[int, ...]] = []
        self._lookup(0, (0,) * model.d)

    def _lookup(self, node: int, point: Tuple[int, ...]) -> int:
        key = (node, point)
        vid = self._index.get(key)
        if vid is None:
            vid = self._register(self.tree.height[node])
            self._index[key] = vid
            self._node.append(node)
            self._point.append(point)
        return vid

    def _build_neighbors(self, vid: int) -> List[Neighbor]:
        tree = self.tree
        node, point = self._node[vid], self._point[vid]
        result: List[Neighbor] = [(self._lookup(tree.parent(node), point), EdgeOrbit.TREE, 1)]
        for j in range(self.model.k - 1):
            result.append((self._lookup(tree.child(node, j), point), EdgeOrbit.TREE, -1))
        for axis in range(self.model.d):
            for step in (1, -1):
                shifted = point[:axis] + (point[axis] + step,) + point[axis + 1 :]
                result.append((self._lookup(node, shifted), EdgeOrbit.LATTICE, 0))
        return result

    def distance_from_origin(self, vid: int) -> int:
        return self.tree.dist0[self._node[vid]] + sum(abs(z) for z in self._point[vid])

    def _distance(self, u: int, v: int) -> int:
        lattice = sum(abs(a - b) for a, b in zip(self._point[u], self._point[v]))
        return self.tree.distance(self._node[u], self._node[v]) + lattice

    def _coords(self, vid: int) -> tuple:
        return (self.tree.address(self._node[vid]), self._point[vid])


class GrandparentRegistry(VertexRegistry):
    """End-fixed k-regular tree with every vertex also joined to its grandparent"""

    def __init__(self, model: GraphModel):
        super().__init__(model)
        self.tree = _EndTree(model.k)
        self._register(0)

    def _sync(self) -> None:
        while len(self._heights) < len(self.tree):
            self._register(self.tree.height[len(self._heights)])

    def _build_neighbors(self, vid: int) -> List[Neighbor]:
        tree = self.tree
        parent = tree.parent(vid)
        result: List[Neighbor] = [
            (tree.parent(parent), EdgeOrbit.GRANDPARENT, 2),
            (parent, EdgeOrbit.TREE, 1),
        ]
        branching = self.model.k - 1
        for j in range(branching):
            result.append((tree.child(vid, j), EdgeOrbit.TREE, -1))
        for j in range(branching):
            child = tree.child(vid, j)
            for i in range(branching):
                result.append((tree.child(child, i), EdgeOrbit.GRANDPARENT, -2))
        self._sync()
        return result

    @staticmethod
    def _from_tree_path(length: int, rise: int) -> int:
        # the tree geodesic climbs `up` steps then descends `length - up`
        up = (length + rise) // 2
        down = length - up
        return -(-up // 2) + -(-down // 2)

    def distance_from_origin(self, vid: int) -> int:
        return self._from_tree_path(self.tree.dist0[vid], self.tree.height[vid])

    def _distance(self, u: int, v: int) -> int:
        length = self.tree.distance(u, v)
        return self._from_tree_path(length, self.tree.height[v] - self.tree.height[u])

    def _coords(self, vid: int) -> tuple:
        return (self.tree.address(vid),)


_REGISTRIES = {
    Family.FIXED_END_TREE: FixedEndTreeRegistry,
    Family.ORIENTED_TREE_112: OrientedTreeRegistry,
    Family.TREE_X_LATTICE: TreeTimesLatticeRegistry,
    Family.GRANDPARENT: GrandparentRegistry,
}


def make_registry(model: GraphModel) -> VertexRegistry:
    return _REGISTRIES[model.family](model)
