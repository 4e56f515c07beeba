"""Fixed-segmentation refits and the exhaustive certification oracle."""
from __future__ import annotations

from functools import lru_cache

import numpy as np

from .._validation import check_gray_image
from ..errors import InvalidArgumentError, TooLargeError
from ..grid import build_grid, induced_multicut
from .result import MilpSolution, SolveStats, Status

__all__ = ["refit_segments", "brute_force_oracle", "connected_partitions", "MAX_ORACLE_EDGES"]

MAX_ORACLE_EDGES = 20
_CHUNK = 1 << 15


def _lower_medians(y, labels, k):
    order = np.lexsort((y, labels))
    counts = np.bincount(labels, minlength=k)
    starts = np.concatenate([[0], np.cumsum(counts)[:-1]])
    return y[order][starts + (counts - 1) // 2]


def refit_segments(img, labels, lam):
    """Best piecewise-constant L1 fit for a fixed segmentation.

    Each segment takes the lowest median of its intensities.

    Returns
    -------
    w : ndarray, shape (m, n)
    objective : float
        Sum of absolute deviations plus ``lam`` times the number of edges
        whose endpoints lie in different segments.
    """
    y = check_gray_image(img)
    labels = np.asarray(labels)
    if labels.shape != y.shape:
        raise InvalidArgumentError(f"label map shape {labels.shape} does not match image {y.shape}")
    return _refit(y, labels, lam, build_grid(*y.shape))


def _refit(y, labels, lam, g):
    flat = labels.ravel().astype(np.int64)
    med = _lower_medians(y.ravel(), flat, int(flat.max()) + 1)
    w = med[flat].reshape(y.shape)
    cut = int(induced_multicut(g, labels).sum())
    return w, float(np.abs(y - w).sum() + lam * cut)


def _propagate(bits, heads, tails, n_nodes):
    """Min-index component labels for a batch of edge subsets."""
    lab = np.tile(np.arange(n_nodes, dtype=np.int8), (len(bits), 1))
    while True:
        old = lab.copy()
        for k in range(len(heads)):
            d = ~bits[:, k]
            a, b = heads[k], tails[k]
            mn = np.minimum(lab[d, a], lab[d, b])
            lab[d, a] = mn
            lab[d, b] = mn
        lab = np.take_along_axis(lab, lab.astype(np.intp), axis=1)
        if np.array_equal(old, lab):
            return lab


@lru_cache(maxsize=16)
def connected_partitions(m, n):
    """Every distinct closure of an edge subset of the ``m x n`` grid.

    Each of the ``2**|E|`` subsets is mapped to the components of its dormant
    edges; duplicates are dropped. Rows are label maps in first-visit order.
    """
    g = build_grid(m, n)
    if g.n_edges > MAX_ORACLE_EDGES:
        raise TooLargeError(f"{m}x{n} grid has {g.n_edges} edges; enumeration is limited to {MAX_ORACLE_EDGES}")
    heads, tails = g.heads, g.tails
    shifts = np.arange(g.n_edges, dtype=np.int64)
    found = []
    total = 1 << g.n_edges
    for start in range(0, total, _CHUNK):
        masks = np.arange(start, min(total, start + _CHUNK), dtype=np.int64)
        bits = ((masks[:, None] >> shifts) & 1).astype(bool)
        found.append(np.unique(_propagate(bits, heads, tails, g.n_nodes), axis=0))
    parts = np.unique(np.concatenate(found), axis=0)
    # min-index labels -> contiguous first-visit labels
    out = np.empty(parts.shape, dtype=np.int64)
    for r, row in enumerate(parts):
        _, out[r] = np.unique(row, return_inverse=True)
    out.flags.writeable = False
    return out


def partition_costs(y, parts, g):
    """Median-refit deviation and cut size of every partition row.

    Vectorized counterpart of :func:`refit_segments` over a batch of label
    maps. Returns ``(deviation, cut_size, w)`` with one row per partition.
    """
    y = np.asarray(y, dtype=float).ravel()
    parts = np.asarray(parts)
    n_parts, n_pix = parts.shape
    order = np.argsort(y, kind="stable")
    ys = y[order]
    lab = parts[:, order]
    med = np.zeros((n_parts, n_pix))
    for s in range(n_pix):
        mask = lab == s
        counts = mask.sum(axis=1)
        rank = np.cumsum(mask, axis=1)
        hit = mask & (rank == ((counts - 1) // 2 + 1)[:, None])
        med[:, s] = np.where(counts > 0, ys[np.argmax(hit, axis=1)], 0.0)
    w = np.take_along_axis(med, parts, axis=1)
    cut = (parts[:, g.heads] != parts[:, g.tails]).sum(axis=1)
    return np.abs(y[None, :] - w).sum(axis=1), cut, w


def brute_force_oracle(img, lam):
    """Exact Potts optimum by enumerating every edge subset.

    Limited to grids with at most 20 edges.
    """
    y = check_gray_image(img)
    m, n = y.shape
    g = build_grid(m, n)
    if g.n_edges > MAX_ORACLE_EDGES:
        raise TooLargeError(f"{m}x{n} grid has {g.n_edges} edges; the oracle handles at most {MAX_ORACLE_EDGES}")
    parts = connected_partitions(m, n)
    dev, cut, _ = partition_costs(y, parts, g)
    cost = dev + lam * cut
    best = int(np.argmin(cost))
    labels = parts[best].reshape(m, n)
    # rescore the winner through the scalar path
    w, obj = _refit(y, labels, lam, g)
    return MilpSolution(
        x=induced_multicut(g, labels),
        w=w,
        objective=obj,
        bound=obj,
        gap=0.0,
        status=Status.OPTIMAL,
        stats=SolveStats(nodes=1 << g.n_edges),
    )
