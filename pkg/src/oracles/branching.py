# src/oracles/branching.py - Galton-Watson oracle for percolation clusters on regular trees

import logging
import math
from typing import Optional

import numpy as np
from scipy import stats

from src.exceptions import UsageError
from src.oracles.closed_forms import EPS, OracleValue

logger = logging.getLogger(__name__)

FIXED_POINT_TOL = 1e-14


class GaltonWatson:
    """Branching process with Binomial(trials, p) offspring and a Binomial(root_trials, p) root.

    On the k-regular tree the open cluster of a vertex is this process with
    root_trials = k and trials = k - 1.
    """

    def __init__(self, trials: int, p: float, root_trials: Optional[int] = None):
        if trials < 1:
            raise UsageError(f"trials must be positive, got {trials}")
        if not 0.0 <= p <= 1.0:
            raise UsageError(f"p must lie in [0, 1], got {p}")
        self.trials = trials
        self.p = p
        self.root_trials = trials if root_trials is None else root_trials

    @property
    def mean(self) -> float:
        return self.trials * self.p

    def pgf(self, s: float) -> float:
        return (1.0 - self.p + self.p * s) ** self.trials

    def root_pgf(self, s: float) -> float:
        return (1.0 - self.p + self.p * s) ** self.root_trials

    def extinction(self, max_iter: int = 1_000_000) -> OracleValue:
        """Smallest fixed point q = f(q) of the offspring generating function"""
        if self.mean <= 1.0:
            return OracleValue(1.0, method="criticality")
        q = 0.0
        residual = 1.0
        for _ in range(max_iter):
            nxt = self.pgf(q)
            residual = abs(nxt - q)
            q = nxt
            if residual < FIXED_POINT_TOL:
                break
        else:
            logger.warning(f"extinction iteration stopped with residual {residual:.2e}")
        residual = abs(self.pgf(q) - q)
        # contraction factor f'(q) < 1 below the fixed point
        slope = self.trials * self.p * (1.0 - self.p + self.p * q) ** (self.trials - 1)
        bound = residual / max(1.0 - slope, EPS)
        return OracleValue(q, error_bound=bound, method="fixed_point", details={"residual": residual})

    def cluster_finite(self) -> OracleValue:
        q = self.extinction()
        return OracleValue(self.root_pgf(q.value), error_bound=self.root_trials * q.error_bound, method=q.method)

    def reach_generation(self, k: int) -> OracleValue:
        """P(the root has a descendant k generations down) = 1 - psi(f^(k-1)(0))"""
        if k < 0:
            raise UsageError(f"generation must be nonnegative, got {k}")
        if k == 0:
            return OracleValue(1.0)
        s = 0.0
        for _ in range(k - 1):
            s = self.pgf(s)
        return OracleValue(1.0 - self.root_pgf(s), error_bound=4 * k * EPS, method="iteration")

    def progeny_pmf(self, n_max: int) -> np.ndarray:
        """P(|K| = n) for n = 0..n_max by Lagrange inversion (entry 0 is zero).

        P(|K| = 1) = (1-p)^r and, for n >= 2,
        P(|K| = n) = r p / (n-1) * Binom(r - 1 + m(n-1), p)(n - 2).
        """
        pmf = np.zeros(n_max + 1)
        if n_max < 1:
            return pmf
        r, m, p = self.root_trials, self.trials, self.p
        pmf[1] = (1.0 - p) ** r
        if n_max >= 2 and p > 0.0:
            n = np.arange(2, n_max + 1)
            pmf[2:] = r * p / (n - 1) * stats.binom.pmf(n - 2, r - 1 + m * (n - 1), p)
        return pmf

    def progeny_pmf_series(self, n_max: int) -> np.ndarray:
        """Same law from the power series H = s f(H), K = s psi(H), truncated at degree n_max"""
        size = n_max + 1
        base = np.zeros(size)
        base[0] = 1.0 - self.p

        def compose(series: np.ndarray, power: int) -> np.ndarray:
            inner = base.copy()
            inner[: size] += self.p * series
            out = np.zeros(size)
            out[0] = 1.0
            for _ in range(power):
                out = np.convolve(out, inner)[:size]
            return out

        subtree = np.zeros(size)
        for _ in range(n_max):
            shifted = np.zeros(size)
            shifted[1:] = compose(subtree, self.trials)[:-1]
            subtree = shifted
        cluster = np.zeros(size)
        cluster[1:] = compose(subtree, self.root_trials)[:-1]
        return cluster

    def progeny(self, n: int) -> OracleValue:
        """P(|K| = n)"""
        if n < 1:
            return OracleValue(0.0)
        return OracleValue(float(self.progeny_pmf(n)[n]), error_bound=4 * n * EPS, method="lagrange_inversion")

    def survival_tail(self, n: int) -> OracleValue:
        """P(|K| >= n), including the mass of infinite clusters"""
        if n <= 1:
            return OracleValue(1.0)
        pmf = self.progeny_pmf(n - 1)
        value = 1.0 - math.fsum(pmf)
        return OracleValue(max(value, 0.0), error_bound=4 * n * EPS, method="lagrange_inversion")

    def survival_curve(self, thresholds) -> np.ndarray:
        """P(|K| >= n) for every threshold, from one pmf evaluation"""
        thresholds = np.asarray(thresholds, dtype=int)
        if thresholds.size == 0:
            return np.zeros(0)
        pmf = self.progeny_pmf(int(thresholds.max()))
        cumulative = np.concatenate([[0.0], np.cumsum(pmf)])
        return np.clip(1.0 - cumulative[np.maximum(thresholds, 0)], 0.0, 1.0)


def tree_cluster(k: int, p: float) -> GaltonWatson:
    """Open cluster of a vertex of the k-regular tree"""
    return GaltonWatson(k - 1, p, root_trials=k)


def peak_reach(k: int, p: float, depth: int) -> OracleValue:
    """P(origin is its cluster's peak and reaches `depth` levels down) on the fixed-end tree"""
    below = GaltonWatson(k - 1, p, root_trials=k - 1).reach_generation(depth)
    return OracleValue((1.0 - p) * below.value, error_bound=below.error_bound, method="iteration")
