"""Solver limits and solution records."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .._validation import check_nonnegative
from ..errors import InvalidArgumentError

__all__ = ["SolveLimits", "SolveStats", "MilpSolution", "compute_gap", "Status"]


class Status:
    OPTIMAL = "optimal"
    GAP_REACHED = "gap-reached"
    TIME_LIMIT = "time-limit"
    NODE_LIMIT = "node-limit"


@dataclass(frozen=True)
class SolveLimits:
    """Stopping rules for one branch-and-cut run.

    ``gap`` is the relative MIP gap at which the search stops; ``None`` or
    ``0`` searches until the tree is exhausted.
    """

    time_limit: float | None = None
    gap: float | None = 0.02
    node_limit: int | None = None
    seed: int = 0

    def __post_init__(self):
        check_nonnegative(self.time_limit, "time_limit")
        check_nonnegative(self.gap, "gap")
        if self.node_limit is not None and (int(self.node_limit) != self.node_limit or self.node_limit < 1):
            raise InvalidArgumentError(f"node_limit must be a positive integer, got {self.node_limit!r}")


@dataclass
class SolveStats:
    nodes: int = 0
    lp_iterations: int = 0
    cuts_added: int = 0
    time: float = 0.0


def compute_gap(incumbent, bound):
    """Relative gap ``(incumbent - bound) / max(|incumbent|, 1e-12)``, >= 0."""
    if bound >= incumbent:
        return 0.0
    return (incumbent - bound) / max(abs(incumbent), 1e-12)


@dataclass
class MilpSolution:
    """Best solution found and the proven bound.

    ``history`` holds one ``(nodes, incumbent, bound)`` triple per processed
    node so the anytime behavior can be inspected.
    """

    x: np.ndarray
    w: np.ndarray | None
    objective: float
    bound: float
    gap: float
    status: str
    stats: SolveStats = field(default_factory=SolveStats)
    history: list = field(default_factory=list, repr=False)

    @property
    def is_optimal(self):
        return self.status == Status.OPTIMAL
