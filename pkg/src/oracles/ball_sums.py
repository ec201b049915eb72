# src/oracles/ball_sums.py - Ball sums over trees with certified tails

import logging
import math
from collections import deque
from typing import Dict, List, Tuple

import numpy as np
from scipy.special import comb

from src.exceptions import OracleDomainError, UsageError
from src.graph_models import Family, GraphModel
from src.oracles.closed_forms import EPS, OracleValue

logger = logging.getLogger(__name__)

# (height delta, multiplicity) of the moves leaving the origin and each arrival state
Moves = List[Tuple[int, int]]


def _arrival_moves(model: GraphModel) -> Tuple[Moves, Dict[int, Moves]]:
    if model.family is Family.FIXED_END_TREE:
        branching = model.k - 1
        start = [(+1, 1), (-1, branching)]
        states = {+1: [(+1, 1), (-1, branching - 1)], -1: [(-1, branching)]}
        return start, states
    if model.family is Family.ORIENTED_TREE_112:
        start = [(+1, 1), (-1, 2), (0, 1)]
        states = {+1: [(+1, 1), (-1, 1), (0, 1)], -1: [(-1, 2), (0, 1)], 0: [(+1, 1), (-1, 2)]}
        return start, states
    raise UsageError(f"Ball sums are available on trees only, not {model}")


def transfer_matrix(model: GraphModel, p: float, lam: float) -> Tuple[np.ndarray, np.ndarray, List[int]]:
    """One-step weights between arrival states (indexed by the last height delta)"""
    start, states = _arrival_moves(model)
    order = sorted(states)
    index = {delta: i for i, delta in enumerate(order)}
    base = math.exp(lam * model.height_unit)

    def weight(delta: int) -> float:
        return p * base**delta

    first = np.zeros(len(order))
    for delta, count in start:
        first[index[delta]] += count * weight(delta)
    step = np.zeros((len(order), len(order)))
    for state, moves in states.items():
        for delta, count in moves:
            step[index[state], index[delta]] += count * weight(delta)
    return first, step, order


def ball_chi(model: GraphModel, p: float, lam: float, radius: int) -> OracleValue:
    """Sum over the radius-R ball of p^d(v,u) Delta(v,u)^lambda plus the exact remainder bound.

    Level weights follow w_{r+1} = w_r M; the mass beyond R is w_{R+1} (I - M)^-1 1,
    which is finite only when the spectral radius of M is below one.
    """
    if radius < 0:
        raise UsageError(f"radius must be nonnegative, got {radius}")
    first, step, _ = transfer_matrix(model, p, lam)
    rho = max(abs(np.linalg.eigvals(step))) if step.size else 0.0
    if rho >= 1.0:
        raise OracleDomainError(
            f"ball sum diverges on {model} at p={p}, lambda={lam} (spectral radius {rho:.6f})"
        )
    terms = [1.0]
    level = first
    for _ in range(radius):
        terms.append(float(level.sum()))
        level = level @ step
    partial = math.fsum(terms)
    ones = np.ones(step.shape[0])
    remainder = float(level @ np.linalg.solve(np.eye(step.shape[0]) - step, ones))
    rounding = 8 * (radius + 1) * EPS * partial
    return OracleValue(
        partial,
        error_bound=remainder + rounding,
        method="ball_sum",
        details={"radius": radius, "spectral_radius": float(rho), "tail": remainder},
    )


def enumerate_ball_chi(model: GraphModel, p: float, lam: float, radius: int) -> float:
    """Direct enumeration over materialized vertices; for small radii and cross-checks"""
    if not model.is_tree:
        raise UsageError(f"Unique-path weights p^distance hold on trees only, not {model}")
    registry = model.new_registry()
    depth = {0: 0}
    queue = deque([0])
    terms = []
    scale = lam * model.height_unit
    while queue:
        x = queue.popleft()
        terms.append(p ** depth[x] * math.exp(scale * registry.height(x)))
        if depth[x] == radius:
            continue
        for y, _, _ in registry.neighbor_ids(x):
            if y not in depth:
                depth[y] = depth[x] + 1
                queue.append(y)
    return math.fsum(terms)


def _median_count(d: int, r: int, s: int, t: int) -> int:
    """Ordered pairs (x, y) whose median with v sits at distances r, s, t from v, x, y"""
    centers = 1 if r == 0 else d * (d - 1) ** (r - 1)
    used = 1 if r > 0 else 0
    arms_x = 1 if s == 0 else (d - used) * (d - 1) ** (s - 1)
    used += 1 if s > 0 else 0
    arms_y = 1 if t == 0 else (d - used) * (d - 1) ** (t - 1)
    return centers * arms_x * arms_y


def _triangle_tail(q: float, radius: int) -> float:
    n = radius + 1
    head = 3.375 * comb(n + 2, 2, exact=True) * q**n
    ratio = q * (n + 3) / (n + 1)
    # shells past the radius shrink geometrically only once ratio < 1
    return head / (1.0 - ratio) if ratio < 1.0 else math.inf


def ball_triangle(d: int, p: float, radius: int) -> OracleValue:
    """Triangle diagram sum_{x,y} p^(d(v,x) + d(x,y) + d(y,v)) on the d-regular tree.

    Each pair is grouped by its median m with v; the three distances sum to
    2(r + s + t). Terms with r + s + t <= radius are summed exactly; the rest is
    bounded by 3.375 C(n+2, 2) (p^2 (d-1))^n per shell n. The tail is infinite when
    the radius is too small for that bound to sum.
    """
    if d < 3:
        raise UsageError(f"Tree degree must be at least 3, got {d}")
    if radius < 0:
        raise UsageError(f"radius must be nonnegative, got {radius}")
    q = p * p * (d - 1)
    if q >= 1.0:
        raise OracleDomainError(f"triangle diverges on the {d}-regular tree at p={p}")
    terms = []
    for n in range(radius + 1):
        weight = p ** (2 * n)
        shell = 0
        for r in range(n + 1):
            for s in range(n - r + 1):
                shell += _median_count(d, r, s, n - r - s)
        terms.append(shell * weight)
    value = math.fsum(terms)
    tail = _triangle_tail(q, radius)
    return OracleValue(
        value,
        error_bound=tail + 8 * (radius + 1) * EPS * value,
        method="median_enumeration",
        details={"radius": radius, "tail": tail},
    )


def ball_brute_force(model: GraphModel, radius: int, integrand: str, p: float, lam: float = 0.0) -> OracleValue:
    """Dispatch ``chi`` or ``triangle`` ball sums on a tree model"""
    if not model.is_tree:
        raise UsageError(f"Ball sums are available on trees only, not {model}")
    if integrand == "chi":
        return ball_chi(model, p, lam, radius)
    if integrand == "triangle":
        return ball_triangle(model.degree, p, radius)
    raise UsageError(f"Unknown integrand '{integrand}'; choose chi or triangle")


def certified_radius(
    model: GraphModel, p: float, lam: float, tolerance: float, start: int = 8, integrand: str = "chi"
) -> int:
    """Smallest radius (doubling from start, then bisecting) whose ball-sum tail is below tolerance"""
    # radius 0 surfaces divergence and bad arguments cheaply
    ball_brute_force(model, 0, integrand, p, lam)

    def tail(radius: int) -> float:
        if integrand == "triangle":
            return _triangle_tail(p * p * (model.degree - 1), radius)
        return ball_brute_force(model, radius, integrand, p, lam).details["tail"]

    hi = start
    while tail(hi) >= tolerance:
        hi *= 2
        if hi > 1 << 16:
            raise OracleDomainError(f"no certified {integrand} radius for tail {tolerance} at p={p}, lambda={lam}")
    lo = 0
    while lo < hi:
        mid = (lo + hi) // 2
        if tail(mid) < tolerance:
            hi = mid
        else:
            lo = mid + 1
    return hi
