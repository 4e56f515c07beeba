"""Command-line interface: ``pmcut {noise,segment,metrics,oracle-check,sweep}``.

Exit codes: 0 success, 1 usage or invalid argument, 2 I/O or file format
error, 3 verification failure (oracle mismatch).
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import pathlib
import sys
import time

import numpy as np

from . import __version__
from .errors import FormatError, InvalidArgumentError
from .grid import build_grid, components_of_dormant
from .imaging import (
    add_gaussian_noise,
    add_salt_pepper,
    atomic_write,
    decode_image,
    from_gray,
    read_image,
    read_label_map,
    render_overlay,
    salt_pepper_count,
    to_gray_normalized,
    write_image,
    write_label_map,
)
from .metrics import score_against_ground_truths, write_csv
from .model import build_potts_milp
from .pipeline import segment_image
from .solver import SolveLimits, branch_and_cut, brute_force_oracle
from .solver.oracle import MAX_ORACLE_EDGES, _refit

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_VERIFY = 0, 1, 2, 3

SWEEP_COLUMNS = ("sigma", "time_limit", "node_limit", "ue", "rec", "co", "op", "mean_gap", "k_superpixels")


class _FileError(Exception):
    """I/O or format failure tied to a path."""

    def __init__(self, path, exc):
        super().__init__(f"{path}: {getattr(exc, 'strerror', None) or exc}")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# -- argument parsing helpers -------------------------------------------------


def _float_list(text):
    try:
        return [float(t) for t in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _int_list(text):
    """Comma-separated integers; ``a:b`` expands to ``range(a, b)``."""
    out = []
    try:
        for tok in (t.strip() for t in text.split(",")):
            if ":" in tok:
                a, b = tok.split(":")
                out.extend(range(int(a), int(b)))
            else:
                out.append(int(tok))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected integers or a:b ranges, got {text!r}")
    return out


def _sizes(text):
    out = []
    for tok in (t.strip() for t in text.split(",")):
        try:
            m, n = (int(v) for v in tok.lower().split("x"))
        except ValueError:
            raise argparse.ArgumentTypeError(f"sizes look like 3x4, got {tok!r}")
        out.append((m, n))
    return out


def _limits(args, node_limit=None, time_limit=None):
    return SolveLimits(
        time_limit=time_limit,
        gap=args.gap,
        node_limit=node_limit if node_limit is not None else args.node_limit,
        seed=args.seed,
    )


def _with_path(path, fn):
    """Call ``fn(path)``, tagging I/O and format errors with the path."""
    try:
        return fn(path)
    except (FormatError, OSError) as exc:
        raise _FileError(path, exc) from exc


def _read_gray(path):
    return to_gray_normalized(_with_path(path, read_image))


def _write_text(path, text):
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        _with_path(path, lambda p: atomic_write(p, text.encode()))


# -- subcommands --------------------------------------------------------------


def cmd_noise(args):
    data = _with_path(args.input, lambda p: pathlib.Path(p).read_bytes())
    raw = _with_path(args.input, lambda _: decode_image(data))
    y = to_gray_normalized(raw)
    if args.noise_type == "gaussian":
        noisy = add_gaussian_noise(y, args.noise_level, seed=args.seed)
        overwritten = None
    else:
        noisy = add_salt_pepper(y, args.noise_level, seed=args.seed)
        overwritten = salt_pepper_count(y.shape, args.noise_level)
    out = from_gray(noisy)
    plain = data[:2] == b"P2"
    _with_path(args.output, lambda p: write_image(out, p, plain=plain))
    changed = int((out.data != from_gray(y).data).sum())
    if overwritten is None:
        print(f"modified pixels: {changed}")
    else:
        print(f"modified pixels: {changed} (overwritten: {overwritten})")
    return EXIT_OK


def _segment_meta(args, result, elapsed):
    return {
        "version": __version__,
        "input": args.input,
        "outputs": {"labels": args.labels, "denoised": args.denoised, "overlay": args.overlay},
        "params": result.params,
        "n_superpixels": result.n_superpixels,
        "n_segments_premerge": int(result.labels_premerge.max()) + 1,
        "patches": [
            {
                "index": p.index,
                "rect": list(p.rect),
                "status": p.status,
                "gap": p.gap,
                "objective": p.objective,
                "bound": p.bound,
                "nodes": p.nodes,
                "segments": p.n_segments,
            }
            for p in result.patches
        ],
        "elapsed": elapsed,
    }


def cmd_segment(args):
    y = _read_gray(args.input)
    t0 = time.perf_counter()
    result = segment_image(
        y,
        args.k,
        args.sigma,
        _limits(args),
        total_time=args.time_limit,
        workers=args.workers,
        min_size=args.min_size,
        cycle_cuts=not args.no_cycle_cuts,
    )
    elapsed = time.perf_counter() - t0
    if args.labels:
        _with_path(args.labels, lambda p: write_label_map(result.labels, p))
    if args.denoised:
        _with_path(args.denoised, lambda p: write_image(from_gray(np.clip(result.denoised, 0.0, 1.0)), p))
    if args.overlay:
        _with_path(args.overlay, lambda p: write_image(render_overlay(y, result.labels), p))
    if args.meta:
        meta = json.dumps(_segment_meta(args, result, elapsed), indent=2) + "\n"
        _with_path(args.meta, lambda p: atomic_write(p, meta.encode()))

    gaps = np.array([p.gap for p in result.patches])
    statuses = {}
    for p in result.patches:
        statuses[p.status] = statuses.get(p.status, 0) + 1
    if args.verbose:
        print("patch  rows      cols      status      gap      nodes  segments")
        for p in result.patches:
            r0, c0, h, w = p.rect
            print(
                f"{p.index:5d}  {r0:3d}-{r0 + h - 1:<4d}  {c0:3d}-{c0 + w - 1:<4d}  "
                f"{p.status:<10s}  {p.gap:7.4f}  {p.nodes:5d}  {p.n_segments:8d}"
            )
    print(
        f"patches: {len(result.patches)} ({', '.join(f'{k}: {v}' for k, v in sorted(statuses.items()))})\n"
        f"gap: min {gaps.min():.4f}  mean {gaps.mean():.4f}  max {gaps.max():.4f}\n"
        f"lambda: {result.params['lambda']:.6g}  superpixels: {result.n_superpixels}  "
        f"pre-merge segments: {int(result.labels_premerge.max()) + 1}  time: {elapsed:.2f}s"
    )
    return EXIT_OK


def _load_label_map(path, shape=None):
    labels = _with_path(path, read_label_map)
    if shape is not None and labels.shape != shape:
        raise InvalidArgumentError(f"{path}: label map is {labels.shape[0]}x{labels.shape[1]}, expected {shape[0]}x{shape[1]}")
    return labels


def cmd_metrics(args):
    sp = _load_label_map(args.superpixels)
    gts = [_load_label_map(p, sp.shape) for p in args.gt]
    modes = args.mode or ["best"]
    name = os.path.splitext(os.path.basename(args.superpixels))[0]
    rows = [(name, args.method, args.k if args.k is not None else "", score_against_ground_truths(sp, gts, mode)) for mode in modes]
    _write_text(args.out, write_csv(rows))
    return EXIT_OK


def random_instance(m, n, seed):
    """Seeded uniform-random ``m x n`` image used by the certification harness."""
    return np.random.default_rng(seed).random((m, n))


def oracle_check_rows(sizes, seeds, lambdas, node_limit=None, tol=1e-6):
    """Compare branch-and-cut against the exhaustive oracle.

    Returns one dict per (size, lambda) with the instance count, the number
    of passes and the worst objective difference.
    """
    for m, n in sizes:
        g = build_grid(m, n)
        if g.n_edges > MAX_ORACLE_EDGES:
            raise InvalidArgumentError(f"{m}x{n} has {g.n_edges} edges; the oracle handles at most {MAX_ORACLE_EDGES}")
    rows = []
    for m, n in sizes:
        for lam in lambdas:
            passed, worst = 0, 0.0
            for seed in seeds:
                y = random_instance(m, n, seed)
                ref = brute_force_oracle(y, lam)
                model = build_potts_milp(y, lam, 1.0, with_cycle_cuts=True)
                sol = branch_and_cut(model, SolveLimits(gap=0.0, node_limit=node_limit, seed=seed))
                _, closed = _refit(y, components_of_dormant(model.grid, sol.x), lam, model.grid)
                diff = max(abs(sol.objective - ref.objective), abs(closed - ref.objective))
                worst = max(worst, diff)
                passed += int(sol.is_optimal and diff <= tol)
            rows.append({"size": f"{m}x{n}", "lambda": lam, "instances": len(seeds), "passed": passed, "max_diff": worst})
    return rows


def cmd_oracle_check(args):
    rows = oracle_check_rows(args.sizes, args.seeds, args.lambdas, args.node_limit)
    print("size  lambda    instances  passed  max|diff|   result")
    ok = True
    for r in rows:
        good = r["passed"] == r["instances"]
        ok &= good
        print(f"{r['size']:<5s} {r['lambda']:<9g} {r['instances']:9d}  {r['passed']:6d}  {r['max_diff']:.3e}  {'PASS' if good else 'FAIL'}")
    return EXIT_OK if ok else EXIT_VERIFY


def sweep_rows(img, gts, k, sigmas, time_limits=(None,), node_limits=(None,), gap=0.02, seed=0, workers=1, mode="best", cycle_cuts=True):
    """Cartesian sweep over sigma and solver limits; one dict per setting."""
    rows = []
    for tl in time_limits:
        for nl in node_limits:
            for sigma in sigmas:
                res = segment_image(
                    img,
                    k,
                    sigma,
                    SolveLimits(gap=gap, node_limit=nl, seed=seed),
                    total_time=tl,
                    workers=workers,
                    cycle_cuts=cycle_cuts,
                )
                rep = score_against_ground_truths(res.labels, gts, mode)
                rows.append(
                    {
                        "sigma": sigma,
                        "time_limit": "" if tl is None else tl,
                        "node_limit": "" if nl is None else nl,
                        "ue": rep.ue,
                        "rec": rep.rec,
                        "co": rep.co,
                        "op": rep.op,
                        "mean_gap": res.mean_gap,
                        "k_superpixels": rep.k_superpixels,
                    }
                )
    return rows


def _sweep_csv(rows):
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(SWEEP_COLUMNS)
    for r in rows:
        writer.writerow(
            [r["sigma"], r["time_limit"], r["node_limit"]]
            + [f"{r[c]:.6f}" for c in ("ue", "rec", "co", "op", "mean_gap")]
            + [r["k_superpixels"]]
        )
    return out.getvalue()


def cmd_sweep(args):
    y = _read_gray(args.input)
    gts = [_load_label_map(p, y.shape) for p in args.gt]
    rows = sweep_rows(
        y,
        gts,
        args.k,
        args.sigmas,
        time_limits=args.time_limit or [None],
        node_limits=args.node_limit or [None],
        gap=args.gap,
        seed=args.seed,
        workers=args.workers,
        mode=args.mode,
        cycle_cuts=not args.no_cycle_cuts,
    )
    _write_text(args.out, _sweep_csv(rows))
    return EXIT_OK


# -- parser -------------------------------------------------------------------


def _solver_flags(p, lists=False):
    if lists:
        p.add_argument("--time-limit", type=_float_list, default=None, help="comma-separated total time budgets (s)")
        p.add_argument("--node-limit", type=_int_list, default=None, help="comma-separated per-patch node limits")
    else:
        p.add_argument("--time-limit", type=float, default=None, help="total time budget in seconds, split over patches")
        p.add_argument("--node-limit", type=int, default=None, help="per-patch branch-and-bound node limit")
    p.add_argument("--gap", type=float, default=0.02, help="relative MIP gap stopping threshold (default 0.02)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1, help="worker processes for patch solves")
    p.add_argument("--no-cycle-cuts", action="store_true", help="disable multicut cycle inequalities")


def build_parser():
    parser = _Parser(prog="pmcut", description="Potts-model superpixels from patchwise MILPs.")
    parser.add_argument("--version", action="version", version=f"pmcut {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("noise", help="add seeded Gaussian or salt-and-pepper noise")
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--noise-type", choices=("gaussian", "sp"), required=True)
    p.add_argument("--noise-level", type=float, required=True, help="std-dev (gaussian) or pixel fraction (sp)")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_noise)

    p = sub.add_parser("segment", help="compute superpixels and a denoised image")
    p.add_argument("input")
    p.add_argument("--k", type=int, required=True, help="desired number of superpixels")
    p.add_argument("--sigma", type=float, default=0.5)
    p.add_argument("--min-size", type=int, default=10)
    _solver_flags(p)
    p.add_argument("--labels", help="output label map (PGM)")
    p.add_argument("--denoised", help="output denoised image (PGM)")
    p.add_argument("--overlay", help="output boundary overlay (PPM)")
    p.add_argument("--meta", help="output run metadata (JSON)")
    p.add_argument("-v", "--verbose", action="store_true", help="print one line per patch")
    p.set_defaults(func=cmd_segment)

    p = sub.add_parser("metrics", help="score a label map against ground truths")
    p.add_argument("superpixels")
    p.add_argument("--gt", nargs="+", required=True, help="ground-truth label maps (PGM)")
    p.add_argument("--mode", choices=("best", "avg"), action="append", help="repeat for several rows")
    p.add_argument("--k", type=int, default=None, help="requested superpixel count for the report")
    p.add_argument("--method", default="pmcut")
    p.add_argument("--out", help="CSV path (default stdout)")
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("oracle-check", help="certify branch-and-cut against exhaustive enumeration")
    p.add_argument("--sizes", type=_sizes, default=[(3, 3)], help="e.g. 3x3,3x4")
    p.add_argument("--seeds", type=_int_list, default=list(range(10)), help="e.g. 0:50 or 1,2,3")
    p.add_argument("--lambdas", type=_float_list, default=[0.01, 0.05, 0.2])
    p.add_argument("--node-limit", type=int, default=None)
    p.set_defaults(func=cmd_oracle_check)

    p = sub.add_parser("sweep", help="sigma x solver-limit sweep with metrics")
    p.add_argument("input")
    p.add_argument("--gt", nargs="+", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--sigmas", type=_float_list, default=[0.4, 0.5, 0.6])
    _solver_flags(p, lists=True)
    p.add_argument("--mode", choices=("best", "avg"), default="best")
    p.add_argument("--out", help="CSV path (default stdout)")
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InvalidArgumentError as exc:
        print(f"pmcut: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except _FileError as exc:
        print(f"pmcut: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
