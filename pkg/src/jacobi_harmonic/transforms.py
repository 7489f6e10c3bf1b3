"""Direct quadrature Fourier transforms.

Forward kernels carry no normalisation: ``e^{-i m phi}`` against the
normalised circle measure, ``e^{-i w x}`` against Lebesgue ``dx`` and
``a^{-i lam} = e^{-i lam t}`` against ``dt = da/a``.  Consequently

    int |f|^2 = (2 pi)^(-d) * sum_m int |F f|^2

where ``d`` counts the continuous frequency axes.  Each axis is transformed
by an explicit ``(K x N)`` kernel matrix (no FFT), so frequency grids are
arbitrary.
"""

from __future__ import annotations

import numpy as np

from .funcspace import Field, GridFunction, SeparableFunction, sample
from .quadrature import Axis, Grid, circle_axis, integer_axis, line_axis

FREQ_HALF_WIDTH = 12.0
FREQ_NODES = 256
DEFAULT_BUDGET = 10**10

FREQ_LABELS = {
    "n": "xi", "t": "lam", "z": "eta1", "y": "eta2", "x": "eta3",
}


def plancherel_constant(continuous_axes: int) -> float:
    return (2.0 * np.pi) ** (-continuous_axes)


def frequency_axis(label: str, half_width: float = FREQ_HALF_WIDTH, nodes: int = FREQ_NODES) -> Axis:
    return line_axis(half_width, nodes, "trapezoid", label)


def _transform_axis(F: GridFunction, label: str, out_axis: Axis, kernel: np.ndarray) -> GridFunction:
    """Contract axis ``label`` of ``F`` against ``kernel[k, j] * w_j``."""
    grid = F.grid
    i = grid.labels.index(label)
    mat = kernel * grid.axes[i].weights[None, :]
    vals = np.moveaxis(np.tensordot(mat, F.values, axes=([1], [i])), 0, i)
    axes = list(grid.axes)
    axes[i] = out_axis
    return GridFunction(Grid(tuple(axes)), vals)


def _check_cost(F: GridFunction, out_sizes: dict, budget: int):
    size = F.grid.size
    cost = 0
    for lab, k in out_sizes.items():
        cost += size * k
        size = size // len(F.grid.axis(lab)) * k
    if cost > budget:
        raise ValueError(
            f"direct transform needs {cost:.3g} multiply-adds (grid {F.grid.shape}), budget {budget:.3g}; "
            "use a separable input"
        )


def circle_ft(F: GridFunction, label: str = "phi", m_max: int | None = None, out_label: str = "m") -> GridFunction:
    """``c_m = sum_j f(phi_j) e^{-i m phi_j} / M`` for ``|m| <= m_max``."""
    ax = F.grid.axis(label)
    if ax.measure_tag != "circle_normalized":
        raise ValueError(f"axis {label!r} is not a normalised circle axis")
    M = len(ax)
    nyq = M // 2 - 1
    m_max = nyq if m_max is None else int(m_max)
    if m_max > nyq or m_max < 0:
        raise ValueError(f"m_max={m_max} beyond the Nyquist bound {nyq} of a {M}-node circle")
    m = integer_axis(-m_max, m_max, out_label)
    kernel = np.exp(-1j * np.outer(m.nodes, ax.nodes))
    return _transform_axis(F, label, m, kernel)


def circle_coefficients(F: GridFunction, label: str = "phi", m_max: int | None = None) -> dict:
    if len(F.grid.axes) != 1:
        raise ValueError("coefficient tables are for one-dimensional circle functions")
    C = circle_ft(F, label, m_max)
    return {int(m): complex(c) for m, c in zip(C.grid.axes[0].nodes, C.values)}


def circle_inverse(coeffs, axis: Axis | int) -> GridFunction:
    """Synthesis ``f(phi) = sum_m c_m e^{i m phi}`` on a circle axis."""
    ax = circle_axis(axis) if isinstance(axis, (int, np.integer)) else axis
    if isinstance(coeffs, GridFunction):
        coeffs = {int(m): c for m, c in zip(coeffs.grid.axes[0].nodes, coeffs.values)}
    vals = np.zeros(len(ax), dtype=complex)
    for m, c in sorted(coeffs.items()):
        vals = vals + complex(c) * np.exp(1j * int(m) * ax.nodes)
    return GridFunction(Grid((ax,)), vals)


def euclidean_ft(F: GridFunction, freq_axes: dict, budget: int = DEFAULT_BUDGET) -> GridFunction:
    """``int f(x) e^{-i <w, x>} dx`` over the axes named in ``freq_axes``.

    ``freq_axes`` maps a spatial label to its output frequency Axis.
    """
    _check_cost(F, {lab: len(a) for lab, a in freq_axes.items()}, budget)
    out = F
    for lab, fa in freq_axes.items():
        ax = out.grid.axis(lab)
        if ax.measure_tag not in ("lebesgue", "multiplicative_log"):
            raise ValueError(f"axis {lab!r} has measure {ax.measure_tag!r}; Euclidean transform needs a line axis")
        out = _transform_axis(out, lab, fa, np.exp(-1j * np.outer(fa.nodes, ax.nodes)))
    return out


def default_freq_axes(labels, half_width=FREQ_HALF_WIDTH, nodes=FREQ_NODES) -> dict:
    return {lab: frequency_axis(FREQ_LABELS.get(lab, "w_" + lab), half_width, nodes) for lab in labels}


def g_ft(F: GridFunction, m_max: int | None = None, xi: Axis | None = None, lam: Axis | None = None,
         budget: int = DEFAULT_BUDGET) -> GridFunction:
    """Composite transform over ``(phi, n, t)`` onto ``(m, xi, lam)``."""
    for lab in ("phi", "n", "t"):
        if lab not in F.grid.labels:
            raise ValueError(f"G transform needs a {lab!r} axis")
    xi = xi or frequency_axis("xi")
    lam = lam or frequency_axis("lam")
    out = circle_ft(F, "phi", m_max)
    return euclidean_ft(out, {"n": xi, "t": lam}, budget)


def heis_ft(F: GridFunction, eta=None, budget: int = DEFAULT_BUDGET) -> GridFunction:
    """Three-dimensional Euclidean transform over ``(z, y, x)``."""
    eta = eta or default_freq_axes(("z", "y", "x"))
    return euclidean_ft(F, eta, budget)


def axis_transform_1d(f: Field, axis: Axis, out_axis: Axis) -> GridFunction:
    """Transform of a one-variable profile along its single axis."""
    F = sample(f.relabel((axis.label,)), Grid((axis,)))
    if axis.measure_tag == "circle_normalized":
        m_max = int(max(abs(out_axis.nodes[0]), abs(out_axis.nodes[-1])))
        return circle_ft(F, axis.label, m_max, out_axis.label)
    return euclidean_ft(F, {axis.label: out_axis})


class SeparableSpectrum:
    """Sum of tensor products of one-dimensional spectra."""

    def __init__(self, labels, terms):
        self.labels = tuple(labels)
        self.terms = tuple(terms)  # (coef, {freq_label: 1-D GridFunction})

    def to_grid(self, budget: int = DEFAULT_BUDGET) -> GridFunction:
        axes = [self.terms[0][1][lab].grid.axes[0] for lab in self.labels]
        grid = Grid(tuple(axes))
        if grid.size > budget:
            raise ValueError(f"spectrum grid of {grid.size} points exceeds budget {budget}")
        vals = np.zeros(grid.shape, dtype=complex)
        for coef, spec in self.terms:
            t = np.asarray(coef, dtype=complex)
            for lab in self.labels:
                t = np.multiply.outer(t, spec[lab].values)
            vals = vals + t
        return GridFunction(grid, vals)


def jacobi_ft(psi, space_axes: dict, freq_axes: dict, budget: int = DEFAULT_BUDGET):
    """Transform over ``(z, y, x, phi, n, t)`` onto ``(eta1..3, m, xi, lam)``.

    A :class:`SeparableFunction` is transformed factor by factor and the
    result is a :class:`SeparableSpectrum`; a sampled ``GridFunction`` is
    transformed directly subject to ``budget``.
    """
    order = ("z", "y", "x", "phi", "n", "t")
    if isinstance(psi, SeparableFunction):
        if tuple(psi.labels) != order:
            raise ValueError(f"Jacobi functions take coordinates {order}")
        out_labels = tuple(freq_axes[lab].label for lab in order)
        terms = []
        for k, (coef, _) in enumerate(psi.terms):
            spec = {}
            for lab in order:
                sp = axis_transform_1d(psi.profile(k, lab), space_axes[lab], freq_axes[lab])
                spec[freq_axes[lab].label] = sp
            terms.append((coef, spec))
        return SeparableSpectrum(out_labels, terms)
    if isinstance(psi, GridFunction):
        if psi.grid.labels != order:
            raise ValueError(f"Jacobi grid must have labels {order}")
        m_ax = freq_axes["phi"]
        m_max = int(max(abs(m_ax.nodes[0]), abs(m_ax.nodes[-1])))
        cost = psi.grid.size * sum(len(freq_axes[lab]) for lab in order)
        if cost > budget:
            raise ValueError(
                f"non-separable Jacobi transform needs about {cost:.3g} operations, budget {budget:.3g}"
            )
        out = circle_ft(psi, "phi", m_max)
        return euclidean_ft(out, {lab: freq_axes[lab] for lab in order if lab != "phi"}, budget)
    raise TypeError("jacobi_ft expects a SeparableFunction or a GridFunction")


def spectrum_to_json(S: GridFunction) -> dict:
    d = S.to_json()
    for a in d["axes"]:
        if a["measure_tag"] == "counting":
            a["integer"] = True
            a["nodes"] = [int(v) for v in a["nodes"]]
    return d
