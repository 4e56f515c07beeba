"""Node LP relaxations, solved with HiGHS and warm-started across nodes."""
from __future__ import annotations

import math

import highspy
import numpy as np
from scipy.sparse import coo_matrix

__all__ = ["LPRelaxation", "solve_lp_relaxation"]

INF = highspy.kHighsInf


def _row_bounds(constraints):
    lo = np.empty(len(constraints))
    hi = np.empty(len(constraints))
    for r, c in enumerate(constraints):
        if c.sense == "<=":
            lo[r], hi[r] = -INF, c.rhs
        elif c.sense == ">=":
            lo[r], hi[r] = c.rhs, INF
        elif c.sense == "=":
            lo[r] = hi[r] = c.rhs
        else:
            raise ValueError(f"unknown constraint sense {c.sense!r}")
    return lo, hi


def _sparse_rows(constraints, n_cols):
    rows, cols, vals = [], [], []
    for r, c in enumerate(constraints):
        for vid, a in c.coefs:
            rows.append(r)
            cols.append(vid)
            vals.append(a)
    return coo_matrix((vals, (rows, cols)), shape=(len(constraints), n_cols))


class LPRelaxation:
    """The LP relaxation of a :class:`~pmcut.model.MilpModel`.

    Binaries are relaxed to [0, 1]; :meth:`solve` fixes a subset of them and
    re-optimizes from the previous basis. Rows added with :meth:`add_rows`
    stay for the lifetime of the object.
    """

    def __init__(self, model, seed=0):
        self.model = model
        vs = model.variables
        self.n_cols = len(vs)
        self.binary_ids = np.array([k for k, v in enumerate(vs) if v.kind == "binary"], dtype=np.int64)
        self.iterations = 0
        self.n_rows = len(model.constraints)

        h = highspy.Highs()
        h.setOptionValue("output_flag", False)
        h.setOptionValue("random_seed", int(seed))
        h.setOptionValue("threads", 1)
        lp = highspy.HighsLp()
        lp.num_col_ = self.n_cols
        lp.num_row_ = self.n_rows
        lp.col_cost_ = np.array([v.obj for v in vs], dtype=float)
        lp.col_lower_ = np.array([v.lb for v in vs], dtype=float)
        lp.col_upper_ = np.array([INF if np.isinf(v.ub) else v.ub for v in vs], dtype=float)
        lo, hi = _row_bounds(model.constraints)
        lp.row_lower_ = lo
        lp.row_upper_ = hi
        a = _sparse_rows(model.constraints, self.n_cols).tocsc()
        lp.a_matrix_.format_ = highspy.MatrixFormat.kColwise
        lp.a_matrix_.start_ = a.indptr.astype(np.int32)
        lp.a_matrix_.index_ = a.indices.astype(np.int32)
        lp.a_matrix_.value_ = a.data.astype(float)
        h.passModel(lp)
        self._h = h
        self._lb = np.zeros(len(self.binary_ids))
        self._ub = np.ones(len(self.binary_ids))
        self._pos = {int(b): k for k, b in enumerate(self.binary_ids)}

    def add_rows(self, constraints):
        if not constraints:
            return
        lo, hi = _row_bounds(constraints)
        a = _sparse_rows(constraints, self.n_cols).tocsr()
        self._h.addRows(
            len(constraints),
            lo,
            hi,
            a.nnz,
            a.indptr[:-1].astype(np.int32),
            a.indices.astype(np.int32),
            a.data.astype(float),
        )
        self.n_rows += len(constraints)

    def _apply_fixings(self, fixings):
        lb = np.zeros(len(self.binary_ids))
        ub = np.ones(len(self.binary_ids))
        for vid, val in (fixings or {}).items():
            k = self._pos[int(vid)]
            lb[k] = ub[k] = float(val)
        changed = np.flatnonzero((lb != self._lb) | (ub != self._ub))
        if len(changed):
            self._h.changeColsBounds(
                len(changed),
                self.binary_ids[changed].astype(np.int32),
                lb[changed],
                ub[changed],
            )
            self._lb, self._ub = lb, ub

    def solve(self, fixings=None):
        """Solve with ``fixings`` (binary id -> 0/1); return ``(objective, values)``.

        Fixings that contradict cycle rows make the relaxation infeasible;
        that is reported as ``(inf, None)``.
        """
        if self.n_cols == 0:
            return 0.0, np.zeros(0)
        self._apply_fixings(fixings)
        self._h.run()
        status = self._h.getModelStatus()
        if status != highspy.HighsModelStatus.kOptimal:
            # a stale basis can occasionally stall the warm start
            self._h.clearSolver()
            self._h.run()
            status = self._h.getModelStatus()
        if status == highspy.HighsModelStatus.kInfeasible:
            return math.inf, None
        if status != highspy.HighsModelStatus.kOptimal:
            raise RuntimeError(f"LP relaxation not solved to optimality: {self._h.modelStatusToString(status)}")
        info = self._h.getInfo()
        self.iterations += int(max(info.simplex_iteration_count, 0))
        values = np.asarray(self._h.getSolution().col_value, dtype=float)
        return float(info.objective_function_value), values


def solve_lp_relaxation(model, fixings=None):
    """Optimal objective and variable values of the node relaxation.

    Binaries are relaxed to [0, 1] except those in ``fixings``.
    """
    return LPRelaxation(model).solve(fixings)
