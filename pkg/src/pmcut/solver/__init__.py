"""Branch-and-cut solver, LP relaxations, separation and the exact oracle."""
from .bnc import branch_and_cut
from .lp import LPRelaxation, solve_lp_relaxation
from .oracle import brute_force_oracle, connected_partitions, partition_costs, refit_segments
from .result import MilpSolution, SolveLimits, SolveStats, Status, compute_gap
from .separation import cycle_violation, separate_cycle_cuts

__all__ = [
    "branch_and_cut",
    "LPRelaxation",
    "solve_lp_relaxation",
    "brute_force_oracle",
    "connected_partitions",
    "partition_costs",
    "refit_segments",
    "MilpSolution",
    "SolveLimits",
    "SolveStats",
    "Status",
    "compute_gap",
    "cycle_violation",
    "separate_cycle_cuts",
]
