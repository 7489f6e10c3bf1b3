"""Groups expressed in integration coordinates.

A chart exposes a group law on tuples of coordinate arrays (one array per
label) together with the density of the left Haar measure relative to the
product of the axis measures (normalised ``dphi``, Lebesgue ``dn``,
``dt = da/a``).  SL(2,R) is charted by KNA coordinates
``g = k(phi) n(n) a(t)``, in which the Haar density is one.
"""

from __future__ import annotations

import numpy as np

from . import groups as gr


class Chart:
    tag: str = ""
    labels: tuple = ()

    def mul(self, p, q):
        raise NotImplementedError

    def inv(self, p):
        raise NotImplementedError

    @property
    def identity(self) -> tuple:
        raise NotImplementedError

    def density(self, p):
        return np.ones(np.broadcast_shapes(*(np.shape(c) for c in p)))

    @property
    def dim(self) -> int:
        return len(self.labels)

    def __repr__(self):
        return f"{type(self).__name__}({self.tag!r}, {self.labels})"


class VectorChart(Chart):
    """Abelian vector group under addition."""

    def __init__(self, labels, tag="R"):
        self.labels = tuple(labels)
        self.tag = tag

    def mul(self, p, q):
        return tuple(a + b for a, b in zip(p, q))

    def inv(self, p):
        return tuple(-a for a in p)

    @property
    def identity(self):
        return (0.0,) * len(self.labels)


class HeisChart(Chart):
    def __init__(self, law="symplectic", labels=("z", "y", "x"), tag="N"):
        if law not in gr.HEIS_LAWS:
            raise ValueError(f"unknown Heisenberg law {law!r}")
        self.law = law
        self.labels = tuple(labels)
        self.tag = tag

    def mul(self, p, q):
        z1, y1, x1 = p
        z2, y2, x2 = q
        z = z1 + z2 + x1 * y2
        if self.law == "symplectic":
            z = z - x2 * y1
        return z, y1 + y2, x1 + x2

    def inv(self, p):
        z, y, x = p
        if self.law == "symplectic":
            return -z, -y, -x
        return -z + x * y, -y, -x

    @property
    def identity(self):
        return 0.0, 0.0, 0.0


def kna_matrix(phi, n, t):
    return gr.iwasawa_compose_array(phi, t, n, "KNA")


def kna_coords(m):
    phi, t, n = gr.iwasawa_decompose_array(m, "KNA")
    return phi, n, t


class GChart(Chart):
    tag = "G"

    def __init__(self, labels=("phi", "n", "t")):
        self.labels = tuple(labels)

    def mul(self, p, q):
        return kna_coords(kna_matrix(*p) @ kna_matrix(*q))

    def inv(self, p):
        return kna_coords(gr.sl2_inv(kna_matrix(*p)))

    @property
    def identity(self):
        return 0.0, 0.0, 0.0


class JChart(Chart):
    tag = "J"
    labels = ("z", "y", "x", "phi", "n", "t")

    def __init__(self, context: gr.GroupContext = gr.DEFAULT_CONTEXT):
        self.context = context

    @staticmethod
    def split(p):
        return np.stack(np.broadcast_arrays(*p[:3]), -1), kna_matrix(*p[3:])

    @staticmethod
    def join(h, m):
        return (h[..., 0], h[..., 1], h[..., 2]) + kna_coords(m)

    def mul(self, p, q):
        return self.join(*gr.jacobi_mul(self.split(p), self.split(q), self.context))

    def inv(self, p):
        return self.join(*gr.jacobi_inv(self.split(p), self.context))

    @property
    def identity(self):
        return (0.0,) * 6


class SChart(Chart):
    """``S = R x| R+*`` in coordinates ``(n, t)``, ``a = e^t``.

    Left translation by ``(n0, a0)`` scales ``dn`` by ``a0^2`` and leaves
    ``da/a`` invariant, so the left Haar density is ``a^-2 = e^(-2t)``
    against ``dn dt``.  ``measure="right_haar"`` uses density one instead
    (``dn da/a``, the right Haar measure).
    """

    tag = "S"

    def __init__(self, measure="left_haar", labels=("n", "t")):
        if measure not in gr.S_MEASURES:
            raise ValueError(f"unknown S measure {measure!r}")
        self.measure = measure
        self.labels = tuple(labels)

    def mul(self, p, q):
        n1, t1 = p
        n2, t2 = q
        return n1 + np.exp(2.0 * t1) * n2, t1 + t2

    def inv(self, p):
        n, t = p
        return -n * np.exp(-2.0 * t), -t

    @property
    def identity(self):
        return 0.0, 0.0

    def density(self, p):
        n, t = p
        if self.measure == "right_haar":
            return np.ones(np.broadcast_shapes(np.shape(n), np.shape(t)))
        return np.broadcast_to(np.exp(-2.0 * np.asarray(t, dtype=float)), np.broadcast_shapes(np.shape(n), np.shape(t)))


class ProductChart(Chart):
    def __init__(self, factors, tag):
        self.factors = tuple(factors)
        self.tag = tag
        self.labels = sum((f.labels for f in self.factors), ())

    def _split(self, p):
        out, i = [], 0
        for f in self.factors:
            out.append(tuple(p[i:i + f.dim]))
            i += f.dim
        return out

    def mul(self, p, q):
        return sum((f.mul(a, b) for f, a, b in zip(self.factors, self._split(p), self._split(q))), ())

    def inv(self, p):
        return sum((f.inv(a) for f, a in zip(self.factors, self._split(p))), ())

    @property
    def identity(self):
        return sum((f.identity for f in self.factors), ())

    def density(self, p):
        out = 1.0
        for f, a in zip(self.factors, self._split(p)):
            out = out * f.density(a)
        return out


def get_chart(tag: str, context: gr.GroupContext = gr.DEFAULT_CONTEXT, heis: str | None = None) -> Chart:
    """Chart for ``tag``; ``heis`` overrides the context's Heisenberg law."""
    law = heis or context.heis
    s = SChart(context.s_measure)
    if tag == "R":
        return VectorChart(("x",), "R")
    if tag == "N":
        return HeisChart(law)
    if tag == "G":
        return GChart()
    if tag == "J":
        return JChart(context)
    if tag == "S":
        return s
    if tag == "FRAK":
        return VectorChart(("z", "y", "a"), "FRAK")
    if tag == "K6":
        return VectorChart(("n", "t"), "K6")
    if tag == "M":
        return ProductChart([HeisChart(law), SChart(context.s_measure, ("sn", "st"))], "M")
    if tag == "B":
        return ProductChart([VectorChart(("n3", "n2", "n1")), SChart(context.s_measure, ("sn", "st"))], "B")
    raise ValueError(f"no chart for group tag {tag!r}")
