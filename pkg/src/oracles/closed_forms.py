# src/oracles/closed_forms.py - Exact tilted quantities on the two tree automorphism groups

import logging
import math
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Sequence

import numpy as np

from src.exceptions import DivergenceError, OracleDomainError, UsageError

logger = logging.getLogger(__name__)

EPS = np.finfo(float).eps
SQRT2 = math.sqrt(2.0)


@dataclass
class OracleValue:
    """Exact value with a bound on |value - true quantity|"""

    value: float
    error_bound: float = 0.0
    method: str = "closed_form"
    details: Dict[str, Any] = field(default_factory=dict)

    def __float__(self) -> float:
        return self.value

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def _check_degree(d: int) -> None:
    if d < 3:
        raise UsageError(f"Tree degree must be at least 3, got {d}")


def _check_probability(p: float) -> None:
    if not 0.0 <= p <= 1.0:
        raise UsageError(f"Probability must lie in [0, 1], got {p}")


# fixed-end tree: Delta(v, parent) = d - 1


def fixed_end_pcl(d: int, lam: float) -> OracleValue:
    """p_c(lambda) = (d-1)^(-max(lambda, 1-lambda))"""
    _check_degree(d)
    return OracleValue((d - 1) ** (-max(lam, 1.0 - lam)))


def fixed_end_chi(d: int, p: float, lam: float) -> OracleValue:
    _check_degree(d)
    _check_probability(p)
    threshold = fixed_end_pcl(d, lam).value
    if p >= threshold:
        raise DivergenceError(f"chi diverges for p={p} >= p_c({lam})={threshold} on the {d}-regular tree")
    b = d - 1
    value = (1.0 - p * p) / ((1.0 - b ** (1.0 - lam) * p) * (1.0 - b**lam * p))
    return OracleValue(value)


def fixed_end_alpha(d: int, p: float) -> OracleValue:
    """alpha_p = beta_p = log_{d-1}(1/p)"""
    _check_degree(d)
    if not 0.0 < p <= 1.0:
        raise UsageError(f"alpha needs p in (0, 1], got {p}")
    return OracleValue(-math.log(p) / math.log(d - 1))


def fixed_end_crossing(p: float, n: int) -> OracleValue:
    """P(origin reaches layer n inside L_{0,n}); the ancestor chain is the only path"""
    _check_probability(p)
    return OracleValue(p**n)


def fixed_end_descendants(d: int, p: float, n: int) -> OracleValue:
    """E[X_{-n}] in L_{-D,0} for D >= n: open descendants n generations down"""
    _check_degree(d)
    _check_probability(p)
    return OracleValue(((d - 1) * p) ** n)


def fixed_end_chi_pt_coefficient(d: int) -> OracleValue:
    """Leading coefficient c in chi_{p_t - eps, 1/2} ~ c eps^-2"""
    _check_degree(d)
    return OracleValue((d - 2) / (d - 1) ** 2)


def mean_field_constant(d: int, lam: float, eps_grid: Sequence[float]) -> OracleValue:
    """Largest c with chi_{p_c(lambda) - eps, lambda} >= c / eps over the grid"""
    pcl = fixed_end_pcl(d, lam).value
    products = []
    for eps in eps_grid:
        if not 0.0 < eps < pcl:
            raise UsageError(f"eps must lie in (0, p_c(lambda)), got {eps}")
        products.append(eps * fixed_end_chi(d, pcl - eps, lam).value)
    return OracleValue(min(products), method="grid_minimum", details={"eps": list(eps_grid), "eps_chi": products})


# oriented (1,1,2) tree: Delta(v, parent) = 2


def _oriented_s(lam: float) -> float:
    return 2.0**lam + 2.0 ** (1.0 - lam) + 1.0


def oriented_pcl(lam: float) -> OracleValue:
    """Smaller root of 3p^2 - s p + 1 with s = 2^lambda + 2^(1-lambda) + 1"""
    s = _oriented_s(lam)
    disc = s * s - 12.0
    if disc < 0:
        raise OracleDomainError(f"negative discriminant {disc} at lambda={lam}")
    # rationalized form of (s - sqrt(disc)) / 6
    return OracleValue(2.0 / (s + math.sqrt(disc)))


def oriented_chi_closed(p: float, lam: float) -> OracleValue:
    _check_probability(p)
    threshold = oriented_pcl(lam).value
    if p >= threshold:
        raise DivergenceError(f"chi diverges for p={p} >= p_c({lam})={threshold} on the oriented tree")
    return OracleValue((1.0 - p * p) / (1.0 - _oriented_s(lam) * p + 3.0 * p * p))


def _solve3(matrix: List[List[float]], rhs: List[float]) -> List[float]:
    """Solve the 3x3 arrival-state system; a numerically singular matrix diverges"""
    a = np.array(matrix, dtype=float)
    if np.linalg.cond(a) > 1.0 / (64 * EPS):
        raise DivergenceError(f"singular susceptibility system (condition number {np.linalg.cond(a):.3e})")
    return [float(x) for x in np.linalg.solve(a, np.array(rhs, dtype=float))]


def oriented_chi_system(p: float, lam: float) -> OracleValue:
    """chi from the arrival-state system.

    chi_plus, chi_zero and chi_minus are the tilted masses of the subtree seen
    after arriving by a downward, lateral or upward step respectively.
    """
    _check_probability(p)
    threshold = oriented_pcl(lam).value
    if p >= threshold:
        raise DivergenceError(f"chi diverges for p={p} >= p_c({lam})={threshold} on the oriented tree")
    down = 2.0 ** (-lam) * p
    up = 2.0**lam * p
    matrix = [
        [1.0 - 2.0 * down, -p, 0.0],
        [-2.0 * down, 1.0, -up],
        [-down, -p, 1.0 - up],
    ]
    chi_plus, chi_zero, chi_minus = _solve3(matrix, [1.0, 1.0, 1.0])
    if min(chi_plus, chi_zero, chi_minus) <= 0:
        raise DivergenceError(f"nonpositive subtree mass at p={p}, lambda={lam}")
    value = 1.0 + 2.0 * down * chi_plus + p * chi_zero + up * chi_minus
    return OracleValue(
        value,
        method="linear_system",
        details={"chi_plus": chi_plus, "chi_zero": chi_zero, "chi_minus": chi_minus},
    )


def oriented_pt() -> OracleValue:
    return oriented_pcl(0.5)


def oriented_alpha(p: float) -> OracleValue:
    """alpha_p = log2((3p^2 - p + 1 + sqrt(disc)) / (2p)) for 0 < p <= p_t.

    disc = 9p^4 - 6p^3 - p^2 - 2p + 1 factors as
    (3p^2 - (1 + 2 sqrt 2) p + 1)(3p^2 + (2 sqrt 2 - 1) p + 1); the first factor
    vanishes at p_t. Discriminants within rounding of zero are snapped to zero.
    """
    if not 0.0 < p <= 1.0:
        raise UsageError(f"alpha needs p in (0, 1], got {p}")
    pt = oriented_pt().value
    if p > pt * (1.0 + 64 * EPS):
        raise OracleDomainError(f"p={p} lies beyond p_t={pt}")
    near = 3.0 * p * p - (1.0 + 2.0 * SQRT2) * p + 1.0
    far = 3.0 * p * p + (2.0 * SQRT2 - 1.0) * p + 1.0
    disc = near * far
    if abs(disc) <= 64 * EPS * far * (1.0 + 3.0 * p * p):
        disc = 0.0
    if disc < 0:
        raise OracleDomainError(f"negative discriminant {disc:.3e} at p={p}")
    value = math.log2((3.0 * p * p - p + 1.0 + math.sqrt(disc)) / (2.0 * p))
    return OracleValue(value, error_bound=0.0 if disc > 0 else math.sqrt(64 * EPS))
