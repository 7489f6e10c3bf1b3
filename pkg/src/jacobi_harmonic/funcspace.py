"""Sampled functions, closed-form test families and the lift maps.

Every closed-form function is a :class:`Field`: a vectorised callable on
chart coordinates together with the tuple of labels it expects.  Lifts and
restrictions turn fields into fields; nothing is ever interpolated, so a
lift can be sampled on any grid whose labels match.

Coordinate labels used throughout:

========  ==========================================
N         ``(z, y, x)``
G         ``(phi, n, t)``  KNA coordinates, ``a = e^t``
G x K     ``(phi, n, t, k1)``
J         ``(z, y, x, phi, n, t)``
Q         ``(z, y, x, phi1, n1, t1, phi2, n2, t2)``
S, K6     ``(n, t)``
FRAK      ``(z, y, a)``
E         ``(z, y, a, b)``
W         ``(n, ta, tb)``  both multiplicative slots in log scale
M         ``(z, y, x, sn, st)``
V         ``(n3, n2, n1, n4, sn, st)``
========  ==========================================
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import groups as gr
from .charts import get_chart, kna_coords, kna_matrix
from .quadrature import Axis, Grid

LABELS = {
    "R": ("x",),
    "N": ("z", "y", "x"),
    "G": ("phi", "n", "t"),
    "GK": ("phi", "n", "t", "k1"),
    "J": ("z", "y", "x", "phi", "n", "t"),
    "Q": ("z", "y", "x", "phi1", "n1", "t1", "phi2", "n2", "t2"),
    "S": ("n", "t"),
    "K6": ("n", "t"),
    "FRAK": ("z", "y", "a"),
    "E": ("z", "y", "a", "b"),
    "W": ("n", "ta", "tb"),
    "M": ("z", "y", "x", "sn", "st"),
    "B": ("n3", "n2", "n1", "sn", "st"),
    "V": ("n3", "n2", "n1", "n4", "sn", "st"),
}


class MissingEvaluatorError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Field:
    """Closed-form function of the coordinates named by ``labels``."""

    labels: tuple
    fn: object
    family: str = "custom"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(self.labels))

    def __call__(self, *coords):
        if len(coords) != len(self.labels):
            raise ValueError(f"{self.family} expects {len(self.labels)} coordinates {self.labels}, got {len(coords)}")
        coords = [np.asarray(c, dtype=float) for c in coords]
        out = np.asarray(self.fn(*coords), dtype=complex)
        return np.broadcast_to(out, np.broadcast_shapes(out.shape, *(c.shape for c in coords)))

    def relabel(self, labels) -> "Field":
        return Field(labels, self.fn, self.family, self.params)

    def scale(self, c) -> "Field":
        fn = self.fn
        return Field(self.labels, lambda *p: c * fn(*p), self.family, dict(self.params, scale=c))

    def __add__(self, other: "Field") -> "Field":
        if other.labels != self.labels:
            raise ValueError(f"label mismatch: {self.labels} vs {other.labels}")
        f, g = self.fn, other.fn
        return Field(self.labels, lambda *p: f(*p) + g(*p), "sum")


def zero_field(labels) -> Field:
    return Field(labels, lambda *p: 0.0, "zero")


def _evaluator(f) -> Field:
    if isinstance(f, Field):
        return f
    if isinstance(f, GridFunction):
        if f.evaluator is None:
            raise MissingEvaluatorError("this operation needs a closed-form evaluator; the GridFunction has none")
        return f.evaluator
    raise TypeError(f"expected Field or GridFunction, got {type(f).__name__}")


class GridFunction:
    """Complex samples of a function on a product grid, stored immutably."""

    def __init__(self, grid: Grid, values, evaluator: Field | None = None):
        values = np.array(values, dtype=complex)
        if values.shape != grid.shape:
            raise ValueError(f"values shape {values.shape} does not match grid shape {grid.shape}")
        if evaluator is not None and tuple(evaluator.labels) != grid.labels:
            raise ValueError(f"evaluator labels {evaluator.labels} do not match grid labels {grid.labels}")
        values.setflags(write=False)
        self.grid = grid
        self.values = values
        self.evaluator = evaluator

    @classmethod
    def from_evaluator(cls, f: Field, grid: Grid) -> "GridFunction":
        return sample(f, grid)

    def __call__(self, *coords):
        return _evaluator(self)(*coords)

    @property
    def labels(self):
        return self.grid.labels

    def to_json(self) -> dict:
        flat = self.values.reshape(-1)
        inter = np.empty(2 * flat.size)
        inter[0::2], inter[1::2] = flat.real, flat.imag
        return {"axes": [a.to_json() for a in self.grid.axes], "values": inter.tolist()}

    @classmethod
    def from_json(cls, d: dict) -> "GridFunction":
        grid = Grid(tuple(Axis.from_json(a) for a in d["axes"]))
        v = np.asarray(d["values"], dtype=float)
        return cls(grid, (v[0::2] + 1j * v[1::2]).reshape(grid.shape))


def sample(f: Field, grid: Grid) -> GridFunction:
    """Evaluate ``f`` at every node of ``grid`` (labels must agree)."""
    f = _evaluator(f)
    if tuple(f.labels) != grid.labels:
        raise ValueError(f"signature mismatch: function takes {f.labels}, grid has {grid.labels}")
    values = np.broadcast_to(f(*grid.mesh()), grid.shape)
    return GridFunction(grid, values, f)


# ---------------------------------------------------------------------------
# test-function families
# ---------------------------------------------------------------------------


def gaussian_bump(labels, sigma=1.0, center=None, amplitude=1.0) -> Field:
    """``amplitude * exp(-sum((x_i - c_i)^2 / (2 sigma_i^2)))``."""
    labels = tuple(labels)
    d = len(labels)
    sig = np.broadcast_to(np.asarray(sigma, dtype=float), (d,)).copy()
    c = np.zeros(d) if center is None else np.broadcast_to(np.asarray(center, dtype=float), (d,)).copy()
    if np.any(sig <= 0):
        raise ValueError("gaussian widths must be positive")

    def fn(*p):
        q = 0.0
        for xi, ci, si in zip(p, c, sig):
            q = q + (xi - ci) ** 2 / (2.0 * si * si)
        return amplitude * np.exp(-q)

    return Field(labels, fn, "gaussian_bump", {"sigma": sig.tolist(), "center": c.tolist(), "amplitude": amplitude})


def shifted_gaussian(labels, shift, sigma=1.0, amplitude=1.0) -> Field:
    f = gaussian_bump(labels, sigma, shift, amplitude)
    return Field(f.labels, f.fn, "shifted_gaussian", f.params)


def trig_poly(coeffs: dict, label: str = "phi") -> Field:
    """``sum_m c_m e^{i m phi}``; ``coeffs`` maps integer m to complex c_m."""
    cs = {int(m): complex(c) for m, c in coeffs.items()}

    def fn(phi):
        out = np.zeros(np.shape(phi), dtype=complex)
        for m, c in cs.items():
            out = out + c * np.exp(1j * m * phi)
        return out

    return Field((label,), fn, "trig_poly", {"coeffs": {str(m): [c.real, c.imag] for m, c in sorted(cs.items())}})


def trig_degree(f: Field) -> int:
    return max((abs(int(m)) for m in f.params.get("coeffs", {})), default=0)


def random_trig_poly(degree: int, rng, label="phi") -> Field:
    ms = range(-degree, degree + 1)
    return trig_poly({m: complex(rng.normal(), rng.normal()) for m in ms}, label)


class SeparableFunction(Field):
    """Finite sum of products of one-variable profiles.

    ``terms`` is a sequence of ``(coef, {label: Field})``; labels missing
    from a term's dict contribute the constant 1.
    """

    def __init__(self, labels, terms):
        labels = tuple(labels)
        norm = []
        for coef, factors in terms:
            for lab, prof in factors.items():
                if lab not in labels:
                    raise ValueError(f"factor label {lab!r} not among {labels}")
                if len(prof.labels) != 1:
                    raise ValueError("separable factors must be one-variable profiles")
            norm.append((complex(coef), dict(factors)))
        self.terms = tuple(norm)

        def fn(*p):
            out = 0.0
            for coef, factors in self.terms:
                prod = coef
                for lab, prof in factors.items():
                    prod = prod * prof(p[labels.index(lab)])
                out = out + prod
            return out

        super().__init__(labels, fn, "separable_product", {"terms": len(norm)})

    def profile(self, term: int, label: str) -> Field:
        factors = self.terms[term][1]
        return factors.get(label, Field((label,), lambda x: 1.0, "one"))

    def __add__(self, other):
        if isinstance(other, SeparableFunction) and other.labels == self.labels:
            return SeparableFunction(self.labels, self.terms + other.terms)
        return Field.__add__(self, other)


def separable_product(labels, factors: dict, coef=1.0) -> SeparableFunction:
    return SeparableFunction(labels, [(coef, factors)])


# ---------------------------------------------------------------------------
# involution and lifts
# ---------------------------------------------------------------------------


def involution(f, group_tag: str, context: gr.GroupContext = gr.DEFAULT_CONTEXT, heis: str | None = None) -> Field:
    """``f_check(g) = conj(f(g^-1))`` under the tagged group's inverse."""
    f = _evaluator(f)
    chart = get_chart(group_tag, context, heis)
    return Field(f.labels, lambda *p: np.conj(f(*chart.inv(p))), "involution")


def upsilon_lift(f) -> Field:
    """``Y(f)(g, k1) = f(g k(k1))`` on ``(phi, n, t, k1)``."""
    f = _evaluator(f)

    def fn(phi, n, t, k1):
        g = kna_matrix(phi, n, t) @ gr.rotation(k1)
        return f(*kna_coords(g))

    return Field(LABELS["GK"], fn, "upsilon_lift")


def restrict_k_identity(F) -> Field:
    """Slice ``k1 = 0`` of a function on ``G x K``."""
    F = _evaluator(F)
    return Field(LABELS["G"], lambda phi, n, t: F(phi, n, t, 0.0 * t), "k_identity_slice")


def gamma_shift(psi, k1: float) -> Field:
    """Right-translate the SL(2) argument of a function on J by ``k(k1)``."""
    psi = _evaluator(psi)
    rot = gr.rotation(float(k1))

    def fn(z, y, x, phi, n, t):
        return psi(z, y, x, *kna_coords(kna_matrix(phi, n, t) @ rot))

    return Field(LABELS["J"], fn, "gamma_shift", {"k1": float(k1)})


def tilde_lift(f, context: gr.GroupContext = gr.DEFAULT_CONTEXT) -> Field:
    """``f~(X, M1, M2) = f(act(M1) X, M1 M2)`` on the Q coordinates."""
    f = _evaluator(f)

    def fn(z, y, x, phi1, n1, t1, phi2, n2, t2):
        m1 = kna_matrix(phi1, n1, t1)
        m2 = kna_matrix(phi2, n2, t2)
        h = gr.sl2_action(m1, np.stack(np.broadcast_arrays(z, y, x), -1), context.action)
        return f(h[..., 0], h[..., 1], h[..., 2], *kna_coords(m1 @ m2))

    return Field(LABELS["Q"], fn, "tilde_lift")


def tau_lift(f, variant: str = "E_additive") -> Field:
    """Extend ``f`` on N (resp. S) to E (resp. W).

    E: ``tau f(n, a, b) = f(sigma(a) n, a + b)`` with ``n = (z, y)``.
    W: ``tau f(n, a, b) = f(a^2 n, a b)``, carried as ``(n, ta, tb)``.
    """
    f = _evaluator(f)
    if variant == "E_additive":
        return Field(LABELS["E"], lambda z, y, a, b: f(z + a * y, y, a + b), "tau_lift_E")
    if variant == "W_multiplicative":
        return Field(LABELS["W"], lambda n, ta, tb: f(np.exp(2.0 * ta) * n, ta + tb), "tau_lift_W")
    raise ValueError(f"unknown tau variant {variant!r}")


def tau_lift_positive(f, a, b, n):
    """W lift evaluated with positive multiplicative slots ``a, b``."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if np.any(a <= 0) or np.any(b <= 0):
        raise ValueError("multiplicative slots must be positive")
    return tau_lift(f, "W_multiplicative")(n, np.log(a), np.log(b))


def lambda_inv(f) -> Field:
    """N to FRAK: ``(n, a) -> f(sigma(a) n, a)``."""
    f = _evaluator(f)
    return Field(LABELS["FRAK"], lambda z, y, a: f(z + a * y, y, a), "lambda_inv")


def lambda_map(g) -> Field:
    """FRAK to N: ``(n, a) -> g(sigma(-a) n, a)``."""
    g = _evaluator(g)
    return Field(LABELS["N"], lambda z, y, x: g(z - x * y, y, x), "lambda_map")


def chi_inv(f) -> Field:
    """S to K6: ``(n, a) -> f(a^2 n, a)``."""
    f = _evaluator(f)
    return Field(LABELS["K6"], lambda n, t: f(np.exp(2.0 * t) * n, t), "chi_inv")


def chi_map(g) -> Field:
    """K6 to S: ``(n, a) -> g(a^-2 n, a)``."""
    g = _evaluator(g)
    return Field(LABELS["S"], lambda n, t: g(np.exp(-2.0 * t) * n, t), "chi_map")


def xi_lift(psi) -> Field:
    """M to V: ``psi((n3 + n1 n2, n2, n1 + n4), s)``."""
    psi = _evaluator(psi)
    return Field(
        LABELS["V"],
        lambda n3, n2, n1, n4, sn, st: psi(n3 + n1 * n2, n2, n1 + n4, sn, st),
        "xi_lift",
    )
