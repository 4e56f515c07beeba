"""Superpixel quality scores: UE, boundary recall, compactness and OP.

All scores live in [0, 1]. UE is lower-is-better; Rec, CO and the OP
composite ``0.4 (1 - UE) + 0.4 Rec + 0.2 CO`` are higher-is-better.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy.ndimage import maximum_filter

from .errors import InvalidArgumentError
from .imaging import boundary_mask

__all__ = [
    "MetricsReport",
    "undersegmentation_error",
    "boundary_recall",
    "compactness",
    "op_score",
    "score_against_ground_truths",
    "CSV_COLUMNS",
    "write_csv",
]

CSV_COLUMNS = ("image", "method", "k_requested", "mode", "ue", "rec", "co", "op", "k_superpixels")


@dataclass(frozen=True)
class MetricsReport:
    ue: float
    rec: float
    co: float
    op: float
    mode: str
    k_superpixels: int


def _same_shape(sp, gt):
    sp, gt = np.asarray(sp), np.asarray(gt)
    if sp.shape != gt.shape:
        raise InvalidArgumentError(f"superpixel map {sp.shape} and ground truth {gt.shape} differ in shape")
    return sp, gt


def undersegmentation_error(sp, gt):
    """Leakage of superpixels across ground-truth segments.

    ``(1/N) * sum_G sum_{S meets G} min(|S & G|, |S - G|)``, so a superpixel
    only slightly overlapping a segment is charged for the small side.
    """
    sp, gt = _same_shape(sp, gt)
    _, s_idx = np.unique(sp.ravel(), return_inverse=True)
    _, g_idx = np.unique(gt.ravel(), return_inverse=True)
    pairs, inter = np.unique(np.stack([s_idx, g_idx]), axis=1, return_counts=True)
    size = np.bincount(s_idx)
    outside = size[pairs[0]] - inter
    return float(np.minimum(inter, outside).sum() / sp.size)


def boundary_recall(sp, gt, k=3):
    """Fraction of ground-truth boundary pixels within ``(k-1)/2`` (Chebyshev)
    of a superpixel boundary pixel; 1 when the ground truth has no boundary."""
    sp, gt = _same_shape(sp, gt)
    if k < 1 or k % 2 == 0:
        raise InvalidArgumentError(f"window size k must be odd and positive, got {k}")
    gt_b = boundary_mask(gt)
    total = int(gt_b.sum())
    if total == 0:
        return 1.0
    near = maximum_filter(boundary_mask(sp).astype(np.uint8), size=k, mode="constant", cval=0) > 0
    return float((gt_b & near).sum() / total)


def _perimeters(sp):
    """Unit pixel edges on each segment's border, image border included."""
    _, idx = np.unique(sp.ravel(), return_inverse=True)
    idx = idx.reshape(sp.shape)
    per = np.zeros(idx.max() + 1, dtype=np.int64)
    padded = np.pad(idx, 1, constant_values=-1)
    core = padded[1:-1, 1:-1]
    for nb in (padded[:-2, 1:-1], padded[2:, 1:-1], padded[1:-1, :-2], padded[1:-1, 2:]):
        np.add.at(per, core[nb != core], 1)
    return idx, per


def compactness(sp):
    """Area-weighted isoperimetric quotient ``sum |S|/N * min(1, 4 pi |S| / P(S)^2)``."""
    sp = np.asarray(sp)
    idx, per = _perimeters(sp)
    area = np.bincount(idx.ravel())
    q = np.minimum(1.0, 4.0 * math.pi * area / per.astype(float) ** 2)
    return float((area / sp.size * q).sum())


def op_score(ue, rec, co):
    """Composite ``0.4 (1 - UE) + 0.4 Rec + 0.2 CO``."""
    for name, v in (("UE", ue), ("Rec", rec), ("CO", co)):
        if not 0.0 <= v <= 1.0:
            raise InvalidArgumentError(f"{name} must lie in [0, 1], got {v}")
    return 0.4 * (1.0 - ue) + 0.4 * rec + 0.2 * co


def score_against_ground_truths(sp, gts, mode="best"):
    """Score ``sp`` against several ground truths.

    ``mode="best"`` reports the ground truth with the highest OP together
    with its own UE/Rec; ``mode="avg"`` averages each score.
    """
    if len(gts) == 0:
        raise InvalidArgumentError("at least one ground truth is required")
    if mode not in ("best", "avg"):
        raise InvalidArgumentError(f"mode must be 'best' or 'avg', got {mode!r}")
    sp = np.asarray(sp)
    co = compactness(sp)
    rows = []
    for gt in gts:
        ue = undersegmentation_error(sp, gt)
        rec = boundary_recall(sp, gt)
        rows.append((ue, rec, op_score(ue, rec, co)))
    k = len(np.unique(sp))
    if mode == "best":
        ue, rec, op = max(rows, key=lambda r: r[2])
    else:
        ue, rec, op = (float(np.mean([r[i] for r in rows])) for i in range(3))
    return MetricsReport(ue, rec, co, op, mode, k)


def write_csv(rows, fp=None):
    """Write ``(image, method, k_requested, MetricsReport)`` tuples as CSV."""
    out = io.StringIO() if fp is None else fp
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for image, method, k_req, rep in rows:
        d = asdict(rep)
        writer.writerow(
            [image, method, k_req, d["mode"]]
            + [f"{d[c]:.6f}" for c in ("ue", "rec", "co", "op")]
            + [d["k_superpixels"]]
        )
    return out.getvalue() if fp is None else None
