"""Shortest-path separation of violated cycle inequalities."""
from __future__ import annotations

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra

__all__ = ["separate_cycle_cuts", "cycle_violation"]

TOL = 1e-6
# csgraph drops explicit zeros, so dormant edges get a negligible length
_EPS = 1e-12


def cycle_violation(xfrac, cycle, chosen):
    """``x_chosen - sum(x_e for other e in cycle)``; positive means violated."""
    xfrac = np.asarray(xfrac)
    others = [e for e in cycle if e != chosen]
    return float(xfrac[chosen] - xfrac[others].sum())


def separate_cycle_cuts(g, xfrac):
    """Find cycle inequalities violated by more than ``1e-6``.

    For every edge ``e' = (u, v)`` with positive value, the shortest ``u-v``
    path under edge lengths ``xfrac`` is computed; when it is shorter than
    ``xfrac[e']`` the path plus ``e'`` is a violated cycle. A shortest path
    that short cannot use ``e'`` itself, so the edge need not be removed.

    Returns
    -------
    list of (tuple of int, int)
        ``(cycle edge ids, chosen edge e')`` pairs, at most one per edge.
    """
    xfrac = np.clip(np.asarray(xfrac, dtype=float), 0.0, 1.0)
    cand = np.flatnonzero(xfrac > TOL)
    if len(cand) == 0:
        return []
    n = g.n_nodes
    heads, tails = g.heads, g.tails
    w = xfrac + _EPS
    adj = csr_matrix(
        (np.concatenate([w, w]), (np.concatenate([heads, tails]), np.concatenate([tails, heads]))),
        shape=(n, n),
    )
    sources = np.unique(heads[cand])
    dist, pred = dijkstra(adj, directed=True, indices=sources, return_predecessors=True, limit=float(xfrac[cand].max()))
    row_of = {int(s): r for r, s in enumerate(sources)}

    cuts = []
    seen = set()
    for ep in cand:
        u, v = int(heads[ep]), int(tails[ep])
        r = row_of[u]
        if not dist[r, v] < xfrac[ep] - TOL:
            continue
        path = []
        node = v
        while node != u:
            prev = int(pred[r, node])
            path.append(g.edge_between(prev, node))
            node = prev
        if int(ep) in path:
            continue
        cycle = tuple(sorted(path + [int(ep)]))
        if xfrac[ep] - xfrac[path].sum() <= TOL:
            continue
        key = (cycle, int(ep))
        if key in seen:
            continue
        seen.add(key)
        cuts.append((cycle, int(ep)))
    return cuts
