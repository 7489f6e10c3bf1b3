"""Quadrature convolution on the groups and their abelian companions.

Outputs are evaluated at requested sample points.  The integrating
function is sampled on a grid, the other is a closed-form field evaluated
off-grid, and each point is one vectorised weighted sum over that grid.
"""

from __future__ import annotations

import numpy as np

from . import groups as gr
from .charts import Chart, get_chart, kna_coords, kna_matrix
from .funcspace import Field, GridFunction, LABELS, _evaluator, sample
from .quadrature import Grid

DEFAULT_BUDGET = 10**8

ABELIAN_TAGS = ("R", "FRAK", "K6", "B")
GROUP_TAGS = ("N", "S", "G", "J", "M")


class BudgetError(RuntimeError):
    pass


def check_budget(points: int, grid: Grid, budget: int = DEFAULT_BUDGET):
    total = points * grid.size
    if total > budget:
        dims = " x ".join(f"{a.label}={len(a)}" for a in grid.axes)
        raise BudgetError(
            f"{points} output points x grid ({dims}) = {total:.3g} kernel evaluations exceeds budget {budget:.3g}"
        )


def _check_measures(grid: Grid, chart: Chart):
    if grid.labels != chart.labels:
        raise ValueError(f"grid labels {grid.labels} do not match {chart.tag} coordinates {chart.labels}")
    for ax in grid.axes:
        angular = ax.label.startswith("phi")
        if angular and ax.measure_tag != "circle_normalized":
            raise ValueError(f"axis {ax.label!r} of {chart.tag} needs the normalised circle measure")
        if not angular and ax.measure_tag not in ("lebesgue", "multiplicative_log"):
            raise ValueError(f"axis {ax.label!r} of {chart.tag} has incompatible measure {ax.measure_tag!r}")


def _as_points(points, dim):
    pts = [np.atleast_1d(np.asarray(c, dtype=float)) for c in points]
    if len(pts) != dim:
        raise ValueError(f"expected {dim} coordinate arrays for the sample points, got {len(pts)}")
    pts = np.broadcast_arrays(*pts)
    return [p.reshape(-1) for p in pts]


def _convolve(u: GridFunction, v: Field, chart: Chart, points, budget):
    """``(u * v)(h) = int v(g^-1 h) u(g) dmu(g)`` at each point ``h``."""
    _check_measures(u.grid, chart)
    pts = _as_points(points, chart.dim)
    check_budget(pts[0].size, u.grid, budget)
    g = u.grid.flat_nodes()
    w = u.grid.flat_weights() * np.asarray(chart.density(g)).reshape(-1) * u.values.reshape(-1)
    ginv = chart.inv(g)
    out = np.empty(pts[0].size, dtype=complex)
    for i in range(out.size):
        h = tuple(np.full(1, p[i]) for p in pts)
        arg = chart.mul(ginv, h)
        out[i] = _dot(v(*arg), w)
    return out


def _dot(vals, w) -> complex:
    # fixed-order pairwise reduction
    return complex(np.sum(np.asarray(vals).reshape(-1) * w))


def convolve_group(u: GridFunction, v, group_tag: str, points,
                   context: gr.GroupContext = gr.DEFAULT_CONTEXT, heis: str | None = None,
                   budget: int = DEFAULT_BUDGET) -> np.ndarray:
    """Group convolution ``int v(g^-1 h) u(g) dmu(g)`` with left Haar ``mu``.

    ``u`` is sampled on a grid in the group's chart coordinates, ``v`` must
    have an evaluator.  ``heis`` overrides the Heisenberg law for N and M.
    """
    if group_tag not in GROUP_TAGS:
        raise ValueError(f"unsupported group tag {group_tag!r}; choose from {GROUP_TAGS}")
    return _convolve(u, _evaluator(v), get_chart(group_tag, context, heis), points, budget)


def convolve_abelian(u: GridFunction, v, companion_tag: str, points,
                     context: gr.GroupContext = gr.DEFAULT_CONTEXT,
                     budget: int = DEFAULT_BUDGET) -> np.ndarray:
    """``int v(p - q) u(q) dq`` on a companion group.

    R, FRAK and K6 are plain vector groups (the K6 log-scale slot makes
    ``db/b`` additive).  B pairs an abelian R^3 with S, whose factor keeps
    the S law and its Haar weight.
    """
    if companion_tag not in ABELIAN_TAGS:
        raise ValueError(f"unsupported companion tag {companion_tag!r}; choose from {ABELIAN_TAGS}")
    return _convolve(u, _evaluator(v), get_chart(companion_tag, context), points, budget)


def convolve_to_grid(u: GridFunction, v, group_tag: str, out_grid: Grid, **kw) -> GridFunction:
    """Full-grid output, for groups of dimension at most three."""
    if len(out_grid.axes) > 3:
        raise ValueError("full-grid convolution output is limited to three dimensions")
    fn = convolve_abelian if group_tag in ABELIAN_TAGS else convolve_group
    vals = fn(u, v, group_tag, out_grid.flat_nodes(), **kw)
    return GridFunction(out_grid, vals.reshape(out_grid.shape))


def convolve_lifted_G(upsilon_f, psi: GridFunction, points, budget: int = DEFAULT_BUDGET) -> np.ndarray:
    """``int_G Yf(g g2^-1, k1) psi(g2) dg2`` at points ``(phi, n, t, k1)``."""
    F = _evaluator(upsilon_f)
    chart = get_chart("G")
    _check_measures(psi.grid, chart)
    pts = _as_points(points, 4)
    check_budget(pts[0].size, psi.grid, budget)
    g2 = psi.grid.flat_nodes()
    w = psi.grid.flat_weights() * psi.values.reshape(-1)
    g2inv = gr.sl2_inv(kna_matrix(*g2))
    out = np.empty(pts[0].size, dtype=complex)
    for i in range(out.size):
        g = kna_matrix(pts[0][i], pts[1][i], pts[2][i])
        phi, n, t = kna_coords(g @ g2inv)
        out[i] = _dot(F(phi, n, t, np.full_like(t, pts[3][i])), w)
    return out


def _q_point(pts, i):
    x = np.array([pts[0][i], pts[1][i], pts[2][i]])
    m1 = kna_matrix(pts[3][i], pts[4][i], pts[5][i])
    m2 = kna_matrix(pts[6][i], pts[7][i], pts[8][i])
    return x, m1, m2


def lift_commutation_sides(psi, f, sample_points, grid: Grid, rhs_grid: Grid | None = None,
                     context: gr.GroupContext = gr.DEFAULT_CONTEXT, budget: int = DEFAULT_BUDGET):
    """Both sides of the commutation of convolution with the ~ lift.

    Left: ``int_J f~((Y, I, M)^-1 q) psi(Y, M)`` with ``J`` embedded in Q as
    ``(Y, I, M)``.  Right: the convolution over the direct-product subgroup
    ``{(Y, M, I)}``, i.e. ``int f~(Y^-1 X, M1 M^-1, M2) psi(Y, M)``: a left
    translation in the Heisenberg slot and a right translation in the first
    SL(2) slot.  The right side is integrated on ``rhs_grid`` (default
    ``grid``) so the two sides share no nodes when different grids are
    passed.  Points are Q coordinates; returns ``(lhs, rhs)`` arrays.
    """
    from .funcspace import tilde_lift

    ftil = tilde_lift(_evaluator(f), context)
    psi_f = _evaluator(psi)
    pts = _as_points(sample_points, 9)
    rhs_grid = grid if rhs_grid is None else rhs_grid
    for gd in (grid, rhs_grid):
        if gd.labels != LABELS["J"]:
            raise ValueError(f"J grid must have labels {LABELS['J']}, got {gd.labels}")
        check_budget(pts[0].size, gd, budget)

    def side(gd, build):
        nodes = gd.flat_nodes()
        y = np.stack(nodes[:3], -1)
        m = kna_matrix(*nodes[3:])
        w = gd.flat_weights() * psi_f(*nodes).reshape(-1)
        out = np.empty(pts[0].size, dtype=complex)
        for i in range(out.size):
            h, a, b = build(y, m, *_q_point(pts, i))
            out[i] = _dot(ftil(h[..., 0], h[..., 1], h[..., 2], *kna_coords(a), *kna_coords(b)), w)
        return out

    eye = np.broadcast_to(np.eye(2), (1, 2, 2))

    def left(y, m, x, m1, m2):
        yinv = gr.q_inv((y, np.broadcast_to(eye, m.shape), m), context)
        return gr.q_mul(yinv, (x[None], m1[None], m2[None]), context)

    def right(y, m, x, m1, m2):
        h = gr.heis_mul(gr.heis_inv(y, context.heis), x[None], context.heis)
        return h, m1[None] @ gr.sl2_inv(m), np.broadcast_to(m2, m.shape)

    return side(grid, left), side(rhs_grid, right)
