from src.oracles.ball_sums import (
    ball_brute_force,
    ball_chi,
    ball_triangle,
    certified_radius,
    enumerate_ball_chi,
    transfer_matrix,
)
from src.oracles.branching import GaltonWatson, peak_reach, tree_cluster
from src.oracles.closed_forms import (
    OracleValue,
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
)

__all__ = [
    "GaltonWatson",
    "OracleValue",
    "ball_brute_force",
    "ball_chi",
    "ball_triangle",
    "certified_radius",
    "enumerate_ball_chi",
    "fixed_end_alpha",
    "fixed_end_chi",
    "fixed_end_chi_pt_coefficient",
    "fixed_end_crossing",
    "fixed_end_descendants",
    "fixed_end_pcl",
    "mean_field_constant",
    "oriented_alpha",
    "oriented_chi_closed",
    "oriented_chi_system",
    "oriented_pcl",
    "oriented_pt",
    "peak_reach",
    "transfer_matrix",
    "tree_cluster",
]
