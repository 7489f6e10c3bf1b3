"""Quadrature grids and Haar-measure integration.

The A factor is always carried in log-scale ``t = log a``, so the
multiplicative Haar measure ``da/a`` is plain ``dt`` and every A-axis is
an ordinary line rule.  The circle carries the normalised measure (total
mass one).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# rho equals the dimension of the nilpotent factor N of SL(2,R)
RHO = 1

MEASURE_TAGS = ("circle_normalized", "lebesgue", "multiplicative_log", "counting")

# Jacobian a^(sign * 2 rho) picked up by each Iwasawa integration order
LINE_SCHEMES = ("trapezoid", "midpoint", "gauss_legendre")

ORDER_JACOBIAN_SIGN = {"ANK": 0, "KNA": 0, "NAK": -1, "KAN": 1}


@dataclass(frozen=True, eq=False)
class Axis:
    label: str
    nodes: np.ndarray
    weights: np.ndarray
    measure_tag: str = "lebesgue"

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        if nodes.ndim != 1 or nodes.shape != weights.shape:
            raise ValueError("nodes and weights must be 1-D arrays of equal length")
        if nodes.size > 1 and np.any(np.diff(nodes) <= 0):
            raise ValueError(f"axis {self.label!r}: nodes must be strictly increasing")
        if np.any(weights <= 0):
            raise ValueError(f"axis {self.label!r}: weights must be positive")
        if self.measure_tag not in MEASURE_TAGS:
            raise ValueError(f"unknown measure tag {self.measure_tag!r}")
        if self.measure_tag == "circle_normalized" and abs(weights.sum() - 1.0) > 1e-14:
            raise ValueError("circle axis weights must sum to one")
        nodes.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)

    def __len__(self):
        return self.nodes.size

    def relabel(self, label: str) -> "Axis":
        return Axis(label, self.nodes, self.weights, self.measure_tag)

    def spec(self) -> dict:
        return {
            "label": self.label,
            "measure_tag": self.measure_tag,
            "size": int(self.nodes.size),
            "lo": float(self.nodes[0]),
            "hi": float(self.nodes[-1]),
        }

    def to_json(self) -> dict:
        return {
            "label": self.label,
            "nodes": self.nodes.tolist(),
            "weights": self.weights.tolist(),
            "measure_tag": self.measure_tag,
        }

    @classmethod
    def from_json(cls, d: dict) -> "Axis":
        return cls(d["label"], np.array(d["nodes"]), np.array(d["weights"]), d["measure_tag"])


@dataclass(frozen=True, eq=False)
class Grid:
    axes: tuple

    def __post_init__(self):
        axes = tuple(self.axes)
        labels = [a.label for a in axes]
        if len(set(labels)) != len(labels):
            raise ValueError(f"grid labels must be distinct: {labels}")
        object.__setattr__(self, "axes", axes)

    @property
    def labels(self) -> tuple:
        return tuple(a.label for a in self.axes)

    @property
    def shape(self) -> tuple:
        return tuple(len(a) for a in self.axes)

    @property
    def size(self) -> int:
        return int(np.prod(self.shape, dtype=np.int64))

    def axis(self, label: str) -> Axis:
        return self.axes[self.labels.index(label)]

    def mesh(self):
        """Broadcastable coordinate arrays, one per axis (open mesh)."""
        return np.meshgrid(*(a.nodes for a in self.axes), indexing="ij", sparse=True)

    def flat_nodes(self):
        """Full coordinate arrays flattened in row-major (grid) order."""
        return [np.broadcast_to(c, self.shape).reshape(-1) for c in self.mesh()]

    def flat_weights(self) -> np.ndarray:
        w = np.ones(())
        for a in self.axes:
            w = np.multiply.outer(w, a.weights)
        return w.reshape(-1)

    def spec(self) -> list:
        return [a.spec() for a in self.axes]


def circle_axis(M: int, label: str = "phi", offset: float = 0.0) -> Axis:
    """Uniform nodes ``2 pi (j + offset) / M`` with weights ``1/M``.

    Exact for trigonometric polynomials of degree below ``M/2``.
    """
    if M < 4 or M % 2:
        raise ValueError(f"circle axis needs an even node count >= 4, got {M}")
    if not 0.0 <= offset < 1.0:
        raise ValueError("offset must lie in [0, 1)")
    nodes = 2.0 * np.pi * (np.arange(M) + offset) / M
    return Axis(label, nodes, np.full(M, 1.0 / M), "circle_normalized")


def line_axis(L: float, N: int, scheme: str = "trapezoid", label: str = "n",
              measure_tag: str = "lebesgue") -> Axis:
    """Truncated rule for a line integral over ``[-L, L]``.

    The trapezoid rule puts half weight on the two endpoint nodes.  For an
    integrand with a jump exactly at a node, sample it with the mean of its
    one-sided limits there; the indicator of ``[-1, 1]`` is then
    integrated exactly whenever ``+-1`` are nodes.  ``midpoint`` uses the
    cell centres, which interleave with the trapezoid nodes.
    """
    if not L > 0:
        raise ValueError("truncation half-width L must be positive")
    if N < 2:
        raise ValueError("line axis needs at least two nodes")
    if scheme not in LINE_SCHEMES:
        raise ValueError(f"unknown line scheme {scheme!r}; choose from {LINE_SCHEMES}")
    if scheme == "trapezoid":
        nodes = np.linspace(-L, L, N)
        h = 2.0 * L / (N - 1)
        weights = np.full(N, h)
        weights[[0, -1]] = h / 2
    elif scheme == "midpoint":
        h = 2.0 * L / N
        nodes = -L + h * (np.arange(N) + 0.5)
        weights = np.full(N, h)
    elif scheme == "gauss_legendre":
        x, w = np.polynomial.legendre.leggauss(N)
        nodes, weights = L * x, L * w
    else:
        raise ValueError(f"unknown line scheme {scheme!r}")
    return Axis(label, nodes, weights, measure_tag)


def loga_axis(L: float, N: int, label: str = "t", scheme: str = "trapezoid") -> Axis:
    """Nodes in ``t = log a``; the weights are those of ``da/a = dt``."""
    return line_axis(L, N, scheme, label, "multiplicative_log")


def integer_axis(m_lo: int, m_hi: int, label: str = "m") -> Axis:
    """Integer frequencies ``m_lo..m_hi`` with counting measure."""
    m = np.arange(m_lo, m_hi + 1, dtype=float)
    return Axis(label, m, np.ones_like(m), "counting")


def weighted_sum(values, grid: Grid) -> complex:
    """Contract ``values`` against the axis weights, last axis first.

    Each contraction is a numpy add-reduce over a contiguous axis, which
    numpy performs by pairwise summation; the order is fixed by the
    grid's axis sequence, so results are reproducible to the bit.
    """
    v = np.asarray(values)
    if v.shape != grid.shape:
        raise ValueError(f"values shape {v.shape} does not match grid shape {grid.shape}")
    for ax in reversed(grid.axes):
        v = np.ascontiguousarray(v * ax.weights).sum(axis=-1)
    return complex(v)


def integrate(F) -> complex:
    """Weighted sum of a ``GridFunction`` over its product grid."""
    return weighted_sum(F.values, F.grid)


def iwasawa_jacobian(t, order: str, rho: float = RHO):
    """Density ``a^(+-2 rho) = e^(+-2 rho t)`` for integrating in ``order``."""
    order = order.upper()
    if order not in ORDER_JACOBIAN_SIGN:
        raise ValueError(f"unknown integration order {order!r}")
    return np.exp(ORDER_JACOBIAN_SIGN[order] * 2.0 * rho * np.asarray(t, dtype=float))


def integrate_G(f, order: str = "ANK", rho: float = RHO) -> complex:
    """Haar integral over SL(2,R) of ``f`` sampled on a ``(phi, n, t)`` grid.

    ``f`` must be expressed in the Iwasawa coordinates of ``order``:
    ANK and KNA carry no Jacobian, NAK carries ``a^(-2 rho)`` and KAN
    carries ``a^(2 rho)``.
    """
    grid = f.grid
    for lab in ("phi", "n", "t"):
        if lab not in grid.labels:
            raise ValueError(f"G integration needs a {lab!r} axis, got {grid.labels}")
    mesh = grid.mesh()
    jac = iwasawa_jacobian(mesh[grid.labels.index("t")], order, rho)
    return weighted_sum(np.broadcast_to(f.values * jac, grid.shape), grid)
