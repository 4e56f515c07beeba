"""Branch-and-cut for the Potts and multicut models.

Search order is best-bound with depth-first plunging: after branching, the
child on the rounding side of the branching variable is processed next and
its sibling goes to a heap keyed by the parent bound. Cycle cuts are global;
they are separated for up to ``ROOT_ROUNDS`` rounds at the root and for one
round every ``CUT_EVERY`` nodes afterwards. Multicut nodes whose relaxation
is integral are always separated until they are feasible.
"""
from __future__ import annotations

import heapq
import itertools
import math
import time

import numpy as np

from ..grid import components_of_dormant, induced_multicut
from ..model import Constraint
from .heuristics import greedy_merge, level_set_cut
from .lp import LPRelaxation
from .oracle import _refit
from .result import MilpSolution, SolveLimits, SolveStats, Status, compute_gap
from .separation import separate_cycle_cuts

__all__ = ["branch_and_cut"]

INT_TOL = 1e-6
PRUNE_TOL = 1e-7
ROOT_ROUNDS = 20
CUT_EVERY = 5


class _Incumbent:
    def __init__(self, model, g):
        self.model = model
        self.g = g
        self.cost = model.objective_vector()[: g.n_edges]
        self.objective = math.inf
        self.x = None
        self.w = None
        self._seen = set()
        self._merged = {}

    def evaluate(self, xbin):
        """Score the closure of a 0/1 edge vector.

        Potts segmentations are first improved by greedy segment merging.
        """
        labels = components_of_dormant(self.g, xbin)
        x = induced_multicut(self.g, labels)
        if self.model.kind != "potts":
            return float(self.cost @ x), x, None
        key = x.tobytes()
        if key not in self._merged:
            y, lam = self.model.image, self.model.lam
            merged = greedy_merge(y, labels, lam, self.g)
            w, obj = _refit(y, merged, lam, self.g)
            self._merged[key] = (obj, induced_multicut(self.g, merged), w)
        return self._merged[key]

    def offer(self, xbin):
        key = xbin.tobytes()
        if key in self._seen:
            return False
        self._seen.add(key)
        obj, x, w = self.evaluate(xbin)
        if obj < self.objective - 1e-12:
            self.objective, self.x, self.w = obj, x, w
            return True
        return False


def branch_and_cut(model, limits=None, trace=None):
    """Solve a :class:`~pmcut.model.MilpModel` to optimality or a limit.

    Parameters
    ----------
    model : MilpModel
    limits : SolveLimits, optional
        Defaults to a 2% gap threshold and no time or node limit.
    trace : text stream, optional
        Receives one line per node: ``node depth bound incumbent cuts``.

    Returns
    -------
    MilpSolution
        For Potts models ``x`` is the multicut induced by the dormant-edge
        components of the best solution and ``w`` its median refit.
    """
    limits = limits or SolveLimits()
    start = time.perf_counter()
    g = model.grid
    n_edges = g.n_edges
    potts = model.kind == "potts"
    separating = model.with_cycle_cuts if potts else True
    lp = LPRelaxation(model, seed=limits.seed)
    stats = SolveStats()
    history = []
    cut_keys = set()

    w_ids = np.asarray(model.w_ids()) if potts else None
    inc = _Incumbent(model, g)
    inc.offer(np.zeros(n_edges, dtype=np.uint8))

    floor = 0.0 if potts else float(np.minimum(inc.cost, 0.0).sum())
    best_bound = floor
    heap = []
    seq = itertools.count()
    current = (floor, 0, {})
    status = None

    def add_cuts(xv):
        new = []
        for cycle, chosen in separate_cycle_cuts(g, xv):
            if (cycle, chosen) in cut_keys:
                continue
            cut_keys.add((cycle, chosen))
            others = tuple((e, 1.0) for e in cycle if e != chosen)
            new.append(Constraint(others + ((chosen, -1.0),), ">=", 0.0, "usercut", ""))
        lp.add_rows(new)
        stats.cuts_added += len(new)
        return len(new)

    while True:
        if current is None:
            if not heap or heap[0][0] >= inc.objective - PRUNE_TOL:
                heap.clear()
                status = Status.OPTIMAL
                best_bound = inc.objective
                break
            b, _, depth, fix = heapq.heappop(heap)
            current = (b, depth, fix)
        if limits.node_limit is not None and stats.nodes >= limits.node_limit:
            status = Status.NODE_LIMIT
            break
        if limits.time_limit is not None and time.perf_counter() - start >= limits.time_limit:
            status = Status.TIME_LIMIT
            break

        parent_bound, depth, fix = current
        obj, vals = lp.solve(fix)
        stats.nodes += 1
        rounds = ROOT_ROUNDS if stats.nodes == 1 else (1 if stats.nodes % CUT_EVERY == 0 else 0)
        while vals is not None:
            xv = vals[:n_edges]
            integral = bool(np.all(np.minimum(xv, 1.0 - xv) <= INT_TOL))
            must = separating and not potts and integral
            if not separating or obj >= inc.objective - PRUNE_TOL or not (must or rounds > 0):
                break
            if add_cuts(xv) == 0:
                break
            rounds -= 1
            obj, vals = lp.solve(fix)

        if vals is None:
            # fixings contradict cycle rows: nothing feasible below this node
            current = None
        else:
            node_bound = max(obj, parent_bound, floor)
            xv = vals[:n_edges]
            integral = bool(np.all(np.minimum(xv, 1.0 - xv) <= INT_TOL))
            inc.offer((xv >= 0.5).astype(np.uint8))
            if potts:
                inc.offer(level_set_cut(g, vals[w_ids]))

            if integral or node_bound >= inc.objective - PRUNE_TOL:
                current = None
            else:
                frac = np.abs(xv - 0.5)
                frac[np.minimum(xv, 1.0 - xv) <= INT_TOL] = np.inf
                j = int(np.argmin(frac))
                up = {**fix, j: 1}
                down = {**fix, j: 0}
                first, second = (up, down) if xv[j] >= 0.5 else (down, up)
                heapq.heappush(heap, (node_bound, next(seq), depth + 1, second))
                current = (node_bound, depth + 1, first)

        frontier = min([current[0]] if current else [], default=math.inf)
        if heap:
            frontier = min(frontier, heap[0][0])
        best_bound = max(best_bound, min(frontier, inc.objective))
        gap = compute_gap(inc.objective, best_bound)
        history.append((stats.nodes, inc.objective, best_bound))
        if trace is not None:
            trace.write(f"{stats.nodes} {depth} {best_bound:.10g} {inc.objective:.10g} {stats.cuts_added}\n")
        if limits.gap is not None and gap <= limits.gap and (current is not None or heap):
            status = Status.OPTIMAL if gap == 0.0 else Status.GAP_REACHED
            break

    best_bound = min(best_bound, inc.objective)
    stats.lp_iterations = lp.iterations
    stats.time = time.perf_counter() - start
    return MilpSolution(
        x=inc.x,
        w=inc.w,
        objective=inc.objective,
        bound=best_bound,
        gap=compute_gap(inc.objective, best_bound),
        status=status,
        stats=stats,
        history=history,
    )

