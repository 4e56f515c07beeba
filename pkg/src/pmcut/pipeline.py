"""Patchwise superpixel generation.

The image is tiled into a near-square grid of rectangular patches, one per
desired superpixel; each patch is segmented and denoised independently by
the Potts MILP, and segments smaller than ``min_size`` are merged into their
most similar neighbor afterwards.
"""
from __future__ import annotations

import heapq
import math
import multiprocessing
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from ._validation import check_count, check_gray_image, check_nonnegative
from .errors import InvalidArgumentError
from .grid import check_label_map, components_of_dormant, relabel_first_visit
from .model import build_potts_milp, contrast_estimate, lambda_from_sigma
from .solver import SolveLimits, branch_and_cut

__all__ = [
    "PatchLayout",
    "PatchSummary",
    "SuperpixelResult",
    "make_patches",
    "segment_image",
    "merge_small_segments",
]


def _round_half_up(v):
    return int(math.floor(v + 0.5))


def _split(total, parts):
    base, extra = divmod(total, parts)
    sizes = [base + 1] * extra + [base] * (parts - extra)
    offsets = np.concatenate([[0], np.cumsum(sizes)[:-1]]).astype(int).tolist()
    return list(zip(offsets, sizes))


@dataclass(frozen=True)
class PatchLayout:
    """Rectangles ``(row0, col0, height, width)`` tiling the image, row-major."""

    shape: tuple
    grid: tuple
    rects: tuple

    def __len__(self):
        return len(self.rects)

    def index_map(self):
        """Patch id of every pixel."""
        out = np.empty(self.shape, dtype=np.int64)
        for p, (r0, c0, h, w) in enumerate(self.rects):
            out[r0 : r0 + h, c0 : c0 + w] = p
        return out


def make_patches(m, n, k):
    """Tile an ``m x n`` image into at least ``k`` near-square patches.

    ``r = round(sqrt(k m / n))`` bands of rows and ``c = ceil(k / r)`` bands of
    columns, each clamped to the image; leftover rows/columns go one each to
    the leading bands.
    """
    m, n = check_count(m, "m"), check_count(n, "n")
    if not isinstance(k, (int, np.integer)) or not 1 <= k <= m * n:
        raise InvalidArgumentError(f"superpixel count must be in [1, {m * n}], got {k!r}")
    r = min(max(_round_half_up(math.sqrt(k * m / n)), 1), m)
    c = min(max(math.ceil(k / r), 1), n)
    if r * c < k:
        r = min(m, math.ceil(k / c))
    rects = tuple(
        (r0, c0, h, w) for r0, h in _split(m, r) for c0, w in _split(n, c)
    )
    return PatchLayout((m, n), (r, c), rects)


@dataclass(frozen=True)
class PatchSummary:
    index: int
    rect: tuple
    status: str
    gap: float
    objective: float
    bound: float
    nodes: int
    time: float
    n_segments: int


@dataclass
class SuperpixelResult:
    """Output of :func:`segment_image`.

    ``labels`` is the final superpixel map (after merging), ``labels_premerge``
    the concatenation of the per-patch segmentations and ``denoised`` the
    per-patch fitted intensities.
    """

    labels: np.ndarray
    denoised: np.ndarray
    labels_premerge: np.ndarray
    layout: PatchLayout
    patches: list
    params: dict = field(default_factory=dict)

    @property
    def n_superpixels(self):
        return int(self.labels.max()) + 1

    @property
    def mean_gap(self):
        return float(np.mean([p.gap for p in self.patches]))


def _solve_patch(task):
    index, rect, patch, lam, cycle_cuts, limits = task
    model = build_potts_milp(patch, lam, 1.0, with_cycle_cuts=cycle_cuts)
    sol = branch_and_cut(model, limits)
    labels = components_of_dormant(model.grid, sol.x)
    summary = PatchSummary(
        index=index,
        rect=rect,
        status=sol.status,
        gap=sol.gap,
        objective=sol.objective,
        bound=sol.bound,
        nodes=sol.stats.nodes,
        time=sol.stats.time,
        n_segments=int(labels.max()) + 1,
    )
    return labels, sol.w, summary


def _run_tasks(tasks, workers):
    if workers <= 1 or len(tasks) <= 1:
        return [_solve_patch(t) for t in tasks]
    # spawn: HiGHS state must not be inherited through fork
    ctx = multiprocessing.get_context("spawn")
    with ProcessPoolExecutor(max_workers=workers, mp_context=ctx) as pool:
        return list(pool.map(_solve_patch, tasks, chunksize=max(1, len(tasks) // (4 * workers))))


def segment_image(
    img,
    k,
    sigma=0.5,
    limits=None,
    *,
    total_time=None,
    workers=1,
    min_size=10,
    cycle_cuts=True,
    lam=None,
    order=None,
):
    """Superpixels and a denoised image from patchwise Potts solves.

    Parameters
    ----------
    img : array_like, shape (m, n)
        Gray intensities in [0, 1].
    k : int
        Desired number of superpixels; sets the patch grid.
    sigma : float
        Regularization; the edge penalty is ``sigma * Y* / 4`` with ``Y*`` the
        contrast of the whole image. Ignored when ``lam`` is given.
    limits : SolveLimits, optional
        Per-patch limits. Defaults to a 2% gap threshold.
    total_time : float, optional
        Overall time budget, split evenly over patches when ``limits`` has
        no time limit of its own.
    workers : int
        Size of the process pool solving patches.
    min_size : int
        Segments below this many pixels are merged after assembly.
    cycle_cuts : bool
        Include the unit-square cycle inequalities and cycle separation.
    order : sequence of int, optional
        Order in which patches are submitted; results do not depend on it.
    """
    y = check_gray_image(img)
    check_nonnegative(sigma, "sigma")
    workers = check_count(workers, "workers")
    min_size = check_count(min_size, "min_size")
    m, n = y.shape
    layout = make_patches(m, n, k)
    ystar = contrast_estimate(y)
    if lam is None:
        lam = lambda_from_sigma(sigma, ystar)
    limits = limits or SolveLimits()
    if total_time is not None and limits.time_limit is None:
        limits = replace(limits, time_limit=total_time / len(layout))

    idx = list(range(len(layout))) if order is None else [int(i) for i in order]
    if sorted(idx) != list(range(len(layout))):
        raise InvalidArgumentError("order must be a permutation of the patch indices")
    tasks = []
    for p in idx:
        r0, c0, h, w = layout.rects[p]
        tasks.append((p, layout.rects[p], y[r0 : r0 + h, c0 : c0 + w], lam, cycle_cuts, limits))
    results = sorted(_run_tasks(tasks, workers), key=lambda res: res[2].index)

    labels = np.empty((m, n), dtype=np.int64)
    denoised = np.empty((m, n))
    offset = 0
    for (r0, c0, h, w), (local, fit, _) in zip(layout.rects, results):
        labels[r0 : r0 + h, c0 : c0 + w] = local + offset
        denoised[r0 : r0 + h, c0 : c0 + w] = fit
        offset += int(local.max()) + 1
    merged = merge_small_segments(labels, y, min_size, regions=layout.index_map())
    params = {
        "k": int(k),
        "sigma": float(sigma),
        "lambda": float(lam),
        "contrast": float(ystar),
        "patches": len(layout),
        "patch_grid": list(layout.grid),
        "min_size": min_size,
        "cycle_cuts": bool(cycle_cuts),
        "time_limit": limits.time_limit,
        "gap": limits.gap,
        "node_limit": limits.node_limit,
        "seed": limits.seed,
        "workers": workers,
    }
    return SuperpixelResult(merged, denoised, labels, layout, [r[2] for r in results], params)


def merge_small_segments(labels, img, min_size=10, regions=None):
    """Merge segments smaller than ``min_size`` into similar neighbors.

    The smallest undersized segment (lowest label on ties) is merged into the
    4-adjacent segment whose mean intensity is closest to its own; ties go
    to the larger neighbor, then the lower label. With ``regions`` (e.g. the
    patch index map) a neighbor in the same region is preferred, so merging
    never crosses a region border unless a segment fills its whole region.

    Returns
    -------
    ndarray
        Label map in first-visit order.
    """
    labels = np.asarray(labels)
    check_label_map(labels, connected=False)
    y = check_gray_image(img)
    if y.shape != labels.shape:
        raise InvalidArgumentError(f"label map shape {labels.shape} does not match image {y.shape}")
    if labels.size < min_size:
        return np.zeros_like(labels, dtype=np.int64)
    flat = labels.ravel().astype(np.int64)
    k = int(flat.max()) + 1
    sizes = np.bincount(flat, minlength=k).tolist()
    sums = np.bincount(flat, weights=y.ravel(), minlength=k).tolist()
    if regions is None:
        region = [0] * k
    else:
        regions = np.asarray(regions).ravel()
        first = np.full(k, -1)
        first[flat[::-1]] = np.arange(len(flat))[::-1]
        region = regions[first].tolist()

    neighbors = [set() for _ in range(k)]
    for a, b in (
        (labels[:, :-1], labels[:, 1:]),
        (labels[:-1, :], labels[1:, :]),
    ):
        diff = a != b
        for u, v in zip(a[diff].tolist(), b[diff].tolist()):
            neighbors[u].add(v)
            neighbors[v].add(u)

    target = list(range(k))
    heap = [(sizes[s], s) for s in range(k) if sizes[s] < min_size]
    heapq.heapify(heap)
    while heap:
        size, a = heapq.heappop(heap)
        if target[a] != a or sizes[a] != size:
            continue
        cands = neighbors[a]
        same = [b for b in cands if region[b] == region[a]]
        if same:
            cands = same
        if not cands:
            continue
        mean_a = sums[a] / sizes[a]
        b = min(cands, key=lambda s: (abs(sums[s] / sizes[s] - mean_a), -sizes[s], s))
        sizes[b] += sizes[a]
        sums[b] += sums[a]
        target[a] = b
        for nb in neighbors[a]:
            neighbors[nb].discard(a)
            if nb != b:
                neighbors[nb].add(b)
                neighbors[b].add(nb)
        neighbors[a] = set()
        if sizes[b] < min_size:
            heapq.heappush(heap, (sizes[b], b))

    def root(s):
        while target[s] != s:
            s = target[s]
        return s

    final = np.array([root(s) for s in range(k)])
    return relabel_first_visit(final[flat].reshape(labels.shape))
