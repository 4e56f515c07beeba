"""Primal heuristics for the Potts model.

Both produce feasible segmentations only; they never affect the bound.
"""
from __future__ import annotations

import heapq

import numpy as np

__all__ = ["level_set_cut", "greedy_merge"]

LEVEL_TOL = 1e-7


def level_set_cut(g, w):
    """Edges whose endpoints carry different fitted intensities."""
    w = np.asarray(w).ravel()
    return (np.abs(w[g.heads] - w[g.tails]) > LEVEL_TOL).astype(np.uint8)


def _deviation(values):
    # values: sorted list; segments are small, plain floats beat numpy here
    h = (len(values) - 1) // 2
    return sum(values[h:]) - sum(values[:h]) - values[h] * (len(values) - 2 * h)


def greedy_merge(y, labels, lam, g):
    """Merge adjacent segments while some merge lowers the Potts objective.

    Each step applies the merge with the largest decrease of
    ``deviation - lam * shared boundary``; ties go to the lexicographically
    smallest pair. Returns a label map (not renumbered).
    """
    flat = labels.ravel().astype(np.int64)
    yv = y.ravel()
    k = int(flat.max()) + 1
    order = np.argsort(flat, kind="stable")
    bounds = np.searchsorted(flat[order], np.arange(k + 1))
    vals = {s: sorted(yv[order[bounds[s] : bounds[s + 1]]].tolist()) for s in range(k)}
    dev = {s: _deviation(v) for s, v in vals.items()}
    shared = {}
    a, b = flat[g.heads], flat[g.tails]
    cut = a != b
    for u, v in zip(np.minimum(a[cut], b[cut]).tolist(), np.maximum(a[cut], b[cut]).tolist()):
        shared[(u, v)] = shared.get((u, v), 0) + 1
    nbrs = {s: set() for s in range(k)}
    for u, v in shared:
        nbrs[u].add(v)
        nbrs[v].add(u)

    def delta(u, v):
        merged = sorted(vals[u] + vals[v])
        return _deviation(merged) - dev[u] - dev[v] - lam * shared[(u, v)], merged

    version = [0] * k
    heap = []

    def push(u, v):
        d, merged = delta(u, v)
        if d < -1e-12:
            heapq.heappush(heap, (d, u, v, version[u], version[v], merged))

    for u, v in shared:
        push(u, v)
    target = np.arange(k)
    while heap:
        _, u, v, vu, vv, merged = heapq.heappop(heap)
        if vu != version[u] or vv != version[v] or v not in nbrs.get(u, ()):
            continue
        # fold v into u
        vals[u] = merged
        dev[u] = _deviation(merged)
        del vals[v], dev[v]
        version[u] += 1
        version[v] += 1
        target[target == v] = u
        for t in nbrs.pop(v):
            nbrs[t].discard(v)
            if t == u:
                continue
            count = shared.pop((min(t, v), max(t, v)))
            key = (min(t, u), max(t, u))
            shared[key] = shared.get(key, 0) + count
            nbrs[t].add(u)
            nbrs[u].add(t)
        shared.pop((u, v), None)
        nbrs[u].discard(v)
        for t in nbrs[u]:
            push(min(t, u), max(t, u))
    return target[flat].reshape(labels.shape)
