"""Explicit MILP instances for the Potts fit and the multicut baseline.

Variable layout of a Potts model (ids are positions in ``variables``)::

    x_0 .. x_{|E|-1}     binary edge indicators (id == edge id)
    w_i_j                fitted intensity, row-major, in [0, 1]
    ep_i_j, em_i_j       positive/negative parts of w - y, >= 0

A multicut model holds only the edge binaries; its cycle inequalities are
separated lazily by the solver.
"""
from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np

from ._validation import check_gray_image
from .errors import InvalidArgumentError
from .grid import build_grid, enumerate_unit_cycles

__all__ = [
    "Variable",
    "Constraint",
    "MilpModel",
    "contrast_estimate",
    "lambda_from_sigma",
    "build_potts_milp",
    "build_multicut_ilp",
    "cycle_rows",
    "write_lp",
]

BLOCK = 5


@dataclass(frozen=True)
class Variable:
    name: str
    kind: str  # "binary" or "continuous"
    lb: float
    ub: float
    obj: float


@dataclass(frozen=True)
class Constraint:
    """Sparse row ``sum(coef * var) <sense> rhs``."""

    coefs: tuple
    sense: str  # "<=", "=", ">="
    rhs: float
    tag: str  # "fit", "bigM", "cycle4", "usercut"
    name: str


@dataclass
class MilpModel:
    """A Potts (``kind="potts"``) or multicut (``kind="multicut"``) instance."""

    kind: str
    image: np.ndarray = field(repr=False)
    lam: float
    big_m: float | None
    variables: list = field(repr=False)
    constraints: list = field(repr=False)
    with_cycle_cuts: bool = False

    @property
    def shape(self):
        return self.image.shape

    @property
    def grid(self):
        return build_grid(*self.shape)

    @property
    def n_binaries(self):
        return sum(v.kind == "binary" for v in self.variables)

    @property
    def n_continuous(self):
        return sum(v.kind == "continuous" for v in self.variables)

    @property
    def n_edges(self):
        m, n = self.shape
        return m * (n - 1) + (m - 1) * n

    def w_ids(self):
        """Variable ids of the fitted intensities, row-major (Potts only)."""
        if self.kind != "potts":
            raise InvalidArgumentError("only Potts models have fitted intensities")
        return np.arange(self.n_edges, self.n_edges + self.image.size)

    def count(self, tag):
        return sum(c.tag == tag for c in self.constraints)

    def objective_vector(self):
        return np.array([v.obj for v in self.variables], dtype=float)


def contrast_estimate(img):
    """Global contrast: spread of the 5x5 block means of the image.

    Trailing blocks on the bottom/right border are the remainder rectangles,
    so every pixel is counted exactly once.
    """
    y = check_gray_image(img)
    y = y - y.min()  # exact zero for constant images
    m, n = y.shape
    means = [
        y[i : i + BLOCK, j : j + BLOCK].mean()
        for i in range(0, m, BLOCK)
        for j in range(0, n, BLOCK)
    ]
    return float(max(means) - min(means))


def lambda_from_sigma(sigma, ystar):
    """Boundary penalty per active edge, ``sigma * ystar / 4``.

    Isolating a single interior pixel then costs ``4 * lam == sigma * ystar``.
    """
    if sigma < 0:
        raise InvalidArgumentError(f"sigma must be nonnegative, got {sigma}")
    return sigma * ystar / 4.0


def cycle_rows(cycle, tag="cycle4", name=""):
    """Rows ``sum(C \\ {e'}) - x_e' >= 0`` for every ``e'`` of a cycle."""
    rows = []
    for k, ep in enumerate(cycle):
        coefs = tuple((e, 1.0) for e in cycle if e != ep) + ((ep, -1.0),)
        rows.append(Constraint(coefs, ">=", 0.0, tag, f"{name}_{k}" if name else ""))
    return rows


def build_potts_milp(img, lam, big_m=1.0, with_cycle_cuts=True):
    """Build the L1 Potts MILP with big-M edge indicators.

    Parameters
    ----------
    img : array_like, shape (m, n)
        Gray intensities in [0, 1].
    lam : float
        Penalty per active edge.
    big_m : float
        Big-M constant; 1 suffices for [0, 1] intensities.
    with_cycle_cuts : bool
        Add the four inequalities of every unit-square cycle.

    Returns
    -------
    MilpModel
    """
    y = check_gray_image(img)
    if lam < 0:
        raise InvalidArgumentError(f"lambda must be nonnegative, got {lam}")
    if big_m < 1:
        raise InvalidArgumentError(f"big-M must be at least 1 for normalized intensities, got {big_m}")
    m, n = y.shape
    g = build_grid(m, n)
    nE, N = g.n_edges, m * n
    lam, big_m = float(lam), float(big_m)

    variables = [Variable(f"x_{k}", "binary", 0.0, 1.0, lam) for k in range(nE)]
    pix = [(i, j) for i in range(m) for j in range(n)]
    variables += [Variable(f"w_{i}_{j}", "continuous", 0.0, 1.0, 0.0) for i, j in pix]
    variables += [Variable(f"ep_{i}_{j}", "continuous", 0.0, np.inf, 1.0) for i, j in pix]
    variables += [Variable(f"em_{i}_{j}", "continuous", 0.0, np.inf, 1.0) for i, j in pix]
    w0, ep0, em0 = nE, nE + N, nE + 2 * N

    constraints = []
    for p, (i, j) in enumerate(pix):
        constraints.append(
            Constraint(
                ((w0 + p, 1.0), (ep0 + p, -1.0), (em0 + p, 1.0)),
                "=",
                float(y[i, j]),
                "fit",
                f"fit_{i}_{j}",
            )
        )
    for e in range(nE):
        h, t = int(g.heads[e]), int(g.tails[e])
        constraints.append(
            Constraint(((w0 + h, 1.0), (w0 + t, -1.0), (e, -big_m)), "<=", 0.0, "bigM", f"bigm_{e}_p")
        )
        constraints.append(
            Constraint(((w0 + h, -1.0), (w0 + t, 1.0), (e, -big_m)), "<=", 0.0, "bigM", f"bigm_{e}_n")
        )
    if with_cycle_cuts:
        for c, cyc in enumerate(enumerate_unit_cycles(g)):
            constraints += cycle_rows(cyc, "cycle4", f"cyc_{c}")

    return MilpModel("potts", y, lam, big_m, variables, constraints, with_cycle_cuts)


def build_multicut_ilp(img, lam):
    """Build the multicut ILP with costs ``lam - |y_h - y_t|`` per edge."""
    y = check_gray_image(img)
    g = build_grid(*y.shape)
    flat = y.ravel()
    c = np.abs(flat[g.heads] - flat[g.tails])
    variables = [Variable(f"x_{k}", "binary", 0.0, 1.0, float(lam - c[k])) for k in range(g.n_edges)]
    return MilpModel("multicut", y, float(lam), None, variables, [])


def _fmt(v):
    return repr(float(v))


def _linear(coefs, variables):
    parts = []
    for vid, a in coefs:
        sign = "-" if a < 0 else "+"
        parts.append(f"{sign} {_fmt(abs(a))} {variables[vid].name}")
    text = " ".join(parts)
    return text[2:] if text.startswith("+ ") else text


def write_lp(model, fp=None):
    """Serialize ``model`` in CPLEX LP format, one constraint per line.

    Parameters
    ----------
    model : MilpModel
    fp : file-like, optional
        Text stream to write to. When omitted the text is returned.
    """
    out = io.StringIO() if fp is None else fp
    vs = model.variables
    obj = [(k, v.obj) for k, v in enumerate(vs) if v.obj != 0.0]
    out.write("Minimize\n")
    out.write(f" obj: {_linear(obj, vs) if obj else '0 ' + vs[0].name}\n")
    out.write("Subject To\n")
    for r, c in enumerate(model.constraints):
        name = c.name or f"r{r}"
        out.write(f" {name}: {_linear(c.coefs, vs)} {c.sense} {_fmt(c.rhs)}\n")
    out.write("Bounds\n")
    for v in vs:
        if v.kind == "binary":
            continue
        ub = "+inf" if np.isinf(v.ub) else _fmt(v.ub)
        out.write(f" {_fmt(v.lb)} <= {v.name} <= {ub}\n")
    out.write("Binaries\n")
    for v in vs:
        if v.kind == "binary":
            out.write(f" {v.name}\n")
    out.write("End\n")
    if fp is None:
        return out.getvalue()
    return None
