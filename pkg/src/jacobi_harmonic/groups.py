"""Exact arithmetic for SL(2,R), its Iwasawa factors, the Heisenberg and
Jacobi groups, and the auxiliary extension groups.

Everything is vectorised: group elements are numpy arrays whose trailing
axes hold the coordinates, so a batch of elements is just a bigger array.
The small dataclasses at the bottom (``SL2Element``, ``HeisenbergPoint``,
...) are thin scalar wrappers for callers that want one element at a time.

Coordinate layouts
------------------
SL2        ``(..., 2, 2)`` matrix
H / N      ``(..., 3)`` as ``(z, y, x)``, ``z`` central
J          pair ``(h, m)``
Q          triple ``(h, m1, m2)``
E          ``(..., 4)`` as ``(n_z, n_y, a, b)``
W          ``(..., 3)`` as ``(n, x, y)`` with ``x, y > 0``
S          ``(..., 2)`` as ``(n, a)`` with ``a > 0``
V          ``(..., 6)`` as ``(n3, n2, n1, n4, s_n, s_a)``
B          ``(..., 5)`` as ``(n3, n2, n1, s_n, s_a)``
FRAK       ``(..., 3)`` as ``(n_z, n_y, a)``
K6         ``(..., 2)`` as ``(n, a)`` with ``a > 0``
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

TWO_PI = 2.0 * math.pi

DET_TOL = 1e-12
DET_RENORM_TOL = 1e-9

HeisLaw = Literal["symplectic", "polarized"]
Action = Literal["inverse_left", "paper_right"]
Order = Literal["KAN", "KNA", "ANK", "NAK"]

ORDERS = ("KAN", "KNA", "ANK", "NAK")
HEIS_LAWS = ("symplectic", "polarized")
ACTIONS = ("inverse_left", "paper_right")
S_MEASURES = ("left_haar", "right_haar")


class DeterminantError(ValueError):
    """Raised when a matrix is too far from unimodular to be repaired."""


# ---------------------------------------------------------------------------
# SL(2, R)
# ---------------------------------------------------------------------------


def sl2_det(m):
    m = np.asarray(m, dtype=float)
    return m[..., 0, 0] * m[..., 1, 1] - m[..., 0, 1] * m[..., 1, 0]


def sl2_validate(m):
    """Return ``m`` with determinant exactly re-centred on one.

    Drift up to ``DET_RENORM_TOL`` is removed by dividing by ``sqrt(det)``;
    anything larger means the input was never in SL(2,R).
    """
    m = np.asarray(m, dtype=float)
    det = sl2_det(m)
    drift = np.abs(det - 1.0)
    if np.any(~np.isfinite(det)) or np.any(drift > DET_RENORM_TOL):
        worst = float(np.nanmax(np.where(np.isfinite(drift), drift, np.inf)))
        raise DeterminantError(f"determinant off by {worst:.3e} (limit {DET_RENORM_TOL:g})")
    if np.any(drift > DET_TOL):
        m = m / np.sqrt(det)[..., None, None]
    return m


def sl2_renormalize(m):
    """Divide out the roundoff drift of ``det`` from a product of SL(2) elements.

    Unlike :func:`sl2_validate` there is no drift limit: the product of two
    unimodular matrices is unimodular, and its computed determinant drifts
    by roughly ``|m|^2 * eps`` once entries grow.
    """
    m = np.asarray(m, dtype=float)
    det = sl2_det(m)
    if np.any(~(det > 0)):
        raise DeterminantError("product lost unimodularity (non-positive or non-finite determinant)")
    return m / np.sqrt(det)[..., None, None]


def sl2_mul(a, b):
    if isinstance(a, SL2Element) and isinstance(b, SL2Element):
        return SL2Element._trusted(sl2_renormalize(a.matrix @ b.matrix))
    return np.matmul(np.asarray(a, dtype=float), np.asarray(b, dtype=float))


def sl2_inv(a):
    if isinstance(a, SL2Element):
        return SL2Element(a.d, -a.b, -a.c, a.a)
    a = np.asarray(a, dtype=float)
    out = np.empty_like(a)
    out[..., 0, 0] = a[..., 1, 1]
    out[..., 0, 1] = -a[..., 0, 1]
    out[..., 1, 0] = -a[..., 1, 0]
    out[..., 1, 1] = a[..., 0, 0]
    return out


def rotation(phi):
    phi = np.asarray(phi, dtype=float)
    c, s = np.cos(phi), np.sin(phi)
    return np.stack([np.stack([c, -s], -1), np.stack([s, c], -1)], -2)


def shear(n):
    n = np.asarray(n, dtype=float)
    one, zero = np.ones_like(n), np.zeros_like(n)
    return np.stack([np.stack([one, n], -1), np.stack([zero, one], -1)], -2)


def dilation(t):
    """The A-matrix ``diag(e^t, e^-t)``; ``t`` is the log-scale."""
    t = np.asarray(t, dtype=float)
    zero = np.zeros_like(t)
    return np.stack([np.stack([np.exp(t), zero], -1), np.stack([zero, np.exp(-t)], -1)], -2)


_GENERATORS = {"rotation": rotation, "shear": shear, "dilation": dilation}


def sl2_generators(kind: str, param):
    if kind not in _GENERATORS:
        raise ValueError(f"unknown generator kind {kind!r}")
    if not np.all(np.isfinite(param)):
        raise ValueError("generator parameter must be finite")
    out = _GENERATORS[kind](param)
    if np.ndim(param) == 0:
        return SL2Element.from_matrix(out)
    return out


def reduce_angle(phi):
    """Map angles into the half-open interval [0, 2*pi)."""
    phi = np.mod(np.asarray(phi, dtype=float), TWO_PI)
    return np.where(phi >= TWO_PI, 0.0, phi)


def _decompose_kan(g):
    g00, g01, g10, g11 = g[..., 0, 0], g[..., 0, 1], g[..., 1, 0], g[..., 1, 1]
    r = np.hypot(g00, g10)
    phi = np.arctan2(g10, g00)
    n = (np.cos(phi) * g01 + np.sin(phi) * g11) / r
    return reduce_angle(phi), np.log(r), n


def iwasawa_decompose_array(g, order: str = "KNA"):
    """Vectorised Iwasawa factors ``(phi, t, n)`` of ``g`` for ``order``.

    ``g = k(phi) a(t) n(n)`` for KAN and so on for the other orders.
    ANK and NAK are obtained by decomposing ``g^-1`` in KNA / KAN.
    """
    g = np.asarray(g, dtype=float)
    order = order.upper()
    if order == "KAN":
        return _decompose_kan(g)
    if order == "KNA":
        phi, t, n = _decompose_kan(g)
        return phi, t, n * np.exp(2.0 * t)
    if order == "ANK":
        phi, t, n = iwasawa_decompose_array(sl2_inv(g), "KNA")
        return reduce_angle(-phi), -t, -n
    if order == "NAK":
        phi, t, n = iwasawa_decompose_array(sl2_inv(g), "KAN")
        return reduce_angle(-phi), -t, -n
    raise ValueError(f"unknown Iwasawa order {order!r}")


def iwasawa_compose_array(phi, t, n, order: str = "KNA"):
    factors = {"K": rotation(phi), "A": dilation(t), "N": shear(n)}
    order = order.upper()
    if sorted(order) != ["A", "K", "N"]:
        raise ValueError(f"unknown Iwasawa order {order!r}")
    out = factors[order[0]] @ factors[order[1]]
    return out @ factors[order[2]]


def iwasawa_decompose(g, order: str = "KNA") -> "IwasawaFactors":
    m = g.matrix if isinstance(g, SL2Element) else sl2_validate(g)
    phi, t, n = iwasawa_decompose_array(m, order)
    return IwasawaFactors(float(phi), float(t), float(n), order.upper())


def iwasawa_compose(f: "IwasawaFactors") -> "SL2Element":
    return SL2Element.from_matrix(iwasawa_compose_array(f.phi, f.t, f.n, f.order))


# ---------------------------------------------------------------------------
# Heisenberg group and the SL(2) action
# ---------------------------------------------------------------------------


def heis_mul(p, q, law: str = "symplectic"):
    if isinstance(p, HeisenbergPoint):
        return HeisenbergPoint(*heis_mul(p.array, q.array, law))
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    z1, y1, x1 = p[..., 0], p[..., 1], p[..., 2]
    z2, y2, x2 = q[..., 0], q[..., 1], q[..., 2]
    if law == "symplectic":
        z = z1 + z2 + x1 * y2 - x2 * y1
    elif law == "polarized":
        z = z1 + z2 + x1 * y2
    else:
        raise ValueError(f"unknown Heisenberg law {law!r}")
    return np.stack([z, y1 + y2, x1 + x2], -1)


def heis_inv(p, law: str = "symplectic"):
    if isinstance(p, HeisenbergPoint):
        return HeisenbergPoint(*heis_inv(p.array, law))
    p = np.asarray(p, dtype=float)
    z, y, x = p[..., 0], p[..., 1], p[..., 2]
    if law == "symplectic":
        return -p
    if law == "polarized":
        return np.stack([-z + x * y, -y, -x], -1)
    raise ValueError(f"unknown Heisenberg law {law!r}")


def sl2_action(m, p, convention: str = "inverse_left"):
    """Act on the ``(y, x)`` plane of ``p`` by the row vector rule.

    ``paper_right`` is ``[y x] M``; ``inverse_left`` is ``[y x] M^-1``,
    which composes covariantly.
    """
    if isinstance(p, HeisenbergPoint):
        mm = m.matrix if isinstance(m, SL2Element) else m
        return HeisenbergPoint(*sl2_action(mm, p.array, convention))
    m = np.asarray(m, dtype=float)
    p = np.asarray(p, dtype=float)
    if convention == "inverse_left":
        m = sl2_inv(m)
    elif convention != "paper_right":
        raise ValueError(f"unknown action convention {convention!r}")
    z, y, x = p[..., 0], p[..., 1], p[..., 2]
    y_new = y * m[..., 0, 0] + x * m[..., 1, 0]
    x_new = y * m[..., 0, 1] + x * m[..., 1, 1]
    return np.stack(np.broadcast_arrays(z, y_new, x_new), -1)


# ---------------------------------------------------------------------------
# Group context: which Heisenberg law and which action J is built from
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GroupContext:
    """Conventions shared by every semidirect law built on the Heisenberg group.

    Only ``symplectic`` + ``inverse_left`` makes J a group. Other pairs are
    rejected unless ``validate=False``, which the axiom checker uses to
    report how they fail.
    """

    heis: str = "symplectic"
    action: str = "inverse_left"
    s_measure: str = "left_haar"
    validate: bool = field(default=True, compare=False)

    def __post_init__(self):
        if self.heis not in HEIS_LAWS:
            raise ValueError(f"unknown Heisenberg law {self.heis!r}")
        if self.action not in ACTIONS:
            raise ValueError(f"unknown action convention {self.action!r}")
        if self.s_measure not in S_MEASURES:
            raise ValueError(f"unknown S measure {self.s_measure!r}")
        if self.validate:
            from .axioms import check_group_axioms

            rep = check_group_axioms("J", sample_count=64, seed=12345, context=self)
            if not rep.passed:
                raise ValueError(
                    f"heis={self.heis!r} with action={self.action!r} is not a group: "
                    + ", ".join(f"{k}={v:.2e}" for k, v in rep.residuals.items())
                )

    def unchecked(self) -> "GroupContext":
        return GroupContext(self.heis, self.action, self.s_measure, validate=False)


# the known-good pair; its axioms are exercised by the test suite
DEFAULT_CONTEXT = GroupContext(validate=False)


def jacobi_mul(g1, g2, context: GroupContext = DEFAULT_CONTEXT):
    """``(X1, M1)(X2, M2) = (X1 . act(M1)(X2), M1 M2)``."""
    if isinstance(g1, JacobiElement):
        h, m = jacobi_mul((g1.h.array, g1.m.matrix), (g2.h.array, g2.m.matrix), context)
        return JacobiElement(HeisenbergPoint(*h), SL2Element.from_matrix(sl2_validate(m)))
    h1, m1 = g1
    h2, m2 = g2
    h = heis_mul(h1, sl2_action(m1, h2, context.action), context.heis)
    return h, sl2_mul(m1, m2)


def jacobi_inv(g, context: GroupContext = DEFAULT_CONTEXT):
    if isinstance(g, JacobiElement):
        h, m = jacobi_inv((g.h.array, g.m.matrix), context)
        return JacobiElement(HeisenbergPoint(*h), SL2Element.from_matrix(m))
    h, m = g
    minv = sl2_inv(m)
    return sl2_action(minv, heis_inv(h, context.heis), context.action), minv


def jacobi_identity(shape=()):
    return np.zeros(shape + (3,)), np.broadcast_to(np.eye(2), shape + (2, 2)).copy()


# ---------------------------------------------------------------------------
# Extension groups
# ---------------------------------------------------------------------------


def sigma(b, n):
    """``sigma(b)(n_z, n_y) = (n_z + b n_y, n_y)`` on the last axis of ``n``."""
    n = np.asarray(n, dtype=float)
    b = np.asarray(b, dtype=float)
    return np.stack([n[..., 0] + b * n[..., 1], n[..., 1]], -1)


def varrho(a, n):
    """``varrho(a)(n) = a^2 n``."""
    return np.asarray(a, dtype=float) ** 2 * np.asarray(n, dtype=float)


def q_mul(p, q, context: GroupContext = DEFAULT_CONTEXT):
    """``(X, M1, M2)(Y, N1, N2) = (X . act(M2)(Y), M1 N1, M2 N2)``."""
    x, m1, m2 = p
    y, n1, n2 = q
    h = heis_mul(x, sl2_action(m2, y, context.action), context.heis)
    return h, sl2_mul(m1, n1), sl2_mul(m2, n2)


def q_inv(p, context: GroupContext = DEFAULT_CONTEXT):
    x, m1, m2 = p
    m2i = sl2_inv(m2)
    return sl2_action(m2i, heis_inv(x, context.heis), context.action), sl2_inv(m1), m2i


def _check_positive(*arrays):
    for a in arrays:
        if np.any(~(np.asarray(a) > 0)):
            raise ValueError("multiplicative coordinate must be strictly positive")


def e_mul(p, q):
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    n = p[..., :2] + sigma(p[..., 3], q[..., :2])
    return np.concatenate([n, (p[..., 2] + q[..., 2])[..., None], (p[..., 3] + q[..., 3])[..., None]], -1)


def e_inv(p):
    p = np.asarray(p, dtype=float)
    n = -sigma(-p[..., 3], p[..., :2])
    return np.concatenate([n, -p[..., 2:]], -1)


def s_mul(p, q):
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    _check_positive(p[..., 1], q[..., 1])
    return np.stack([p[..., 0] + varrho(p[..., 1], q[..., 0]), p[..., 1] * q[..., 1]], -1)


def s_inv(p):
    p = np.asarray(p, dtype=float)
    _check_positive(p[..., 1])
    a = p[..., 1]
    return np.stack([-p[..., 0] / a**2, 1.0 / a], -1)


def w_mul(p, q):
    """``(n, x, y)(m, a, b) = (n + y^2 m, x a, y b)``."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    _check_positive(p[..., 1:], q[..., 1:])
    return np.stack(
        [p[..., 0] + varrho(p[..., 2], q[..., 0]), p[..., 1] * q[..., 1], p[..., 2] * q[..., 2]], -1
    )


def w_inv(p):
    p = np.asarray(p, dtype=float)
    _check_positive(p[..., 1:])
    return np.stack([-p[..., 0] / p[..., 2] ** 2, 1.0 / p[..., 1], 1.0 / p[..., 2]], -1)


def v_mul(p, q):
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    return np.concatenate([e_mul(p[..., :4], q[..., :4]), s_mul(p[..., 4:], q[..., 4:])], -1)


def v_inv(p):
    p = np.asarray(p, dtype=float)
    return np.concatenate([e_inv(p[..., :4]), s_inv(p[..., 4:])], -1)


def b_mul(p, q):
    """Abelian on the three vector slots, the S law on the last pair."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    return np.concatenate([p[..., :3] + q[..., :3], s_mul(p[..., 3:], q[..., 3:])], -1)


def b_inv(p):
    p = np.asarray(p, dtype=float)
    return np.concatenate([-p[..., :3], s_inv(p[..., 3:])], -1)


def frak_mul(p, q):
    return np.asarray(p, dtype=float) + np.asarray(q, dtype=float)


def frak_inv(p):
    return -np.asarray(p, dtype=float)


def k6_mul(p, q):
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    _check_positive(p[..., 1], q[..., 1])
    return np.stack([p[..., 0] + q[..., 0], p[..., 1] * q[..., 1]], -1)


def k6_inv(p):
    p = np.asarray(p, dtype=float)
    _check_positive(p[..., 1])
    return np.stack([-p[..., 0], 1.0 / p[..., 1]], -1)


_FLAT_LAWS = {
    "E": (e_mul, e_inv, 4),
    "W": (w_mul, w_inv, 3),
    "S": (s_mul, s_inv, 2),
    "V": (v_mul, v_inv, 6),
    "B": (b_mul, b_inv, 5),
    "FRAK": (frak_mul, frak_inv, 3),
    "K6": (k6_mul, k6_inv, 2),
}

# positions of the multiplicative slots in each flat layout
POSITIVE_SLOTS = {"E": (), "W": (1, 2), "S": (1,), "V": (5,), "B": (4,), "FRAK": (), "K6": (1,)}


def flat_identity(tag: str, shape=()):
    mul, inv, dim = _FLAT_LAWS[tag]
    e = np.zeros(shape + (dim,))
    for i in POSITIVE_SLOTS[tag]:
        e[..., i] = 1.0
    return e


def _q_flatten(p):
    h, m1, m2 = p
    lead = h.shape[:-1]
    return np.concatenate([h, m1.reshape(lead + (4,)), m2.reshape(lead + (4,))], -1)


def _q_unflatten(c):
    c = np.asarray(c, dtype=float)
    lead = c.shape[:-1]
    return c[..., :3], c[..., 3:7].reshape(lead + (2, 2)), c[..., 7:11].reshape(lead + (2, 2))


def extended_mul(tag: str, p, q, context: GroupContext = DEFAULT_CONTEXT):
    if isinstance(p, ExtendedPoint):
        if p.tag != tag or q.tag != tag:
            raise ValueError(f"tag mismatch: {p.tag!r} * {q.tag!r} under {tag!r}")
        return ExtendedPoint(tag, tuple(extended_mul(tag, np.array(p.coords), np.array(q.coords), context).tolist()))
    if tag == "Q":
        return _q_flatten(q_mul(_q_unflatten(p), _q_unflatten(q), context))
    if tag not in _FLAT_LAWS:
        raise ValueError(f"unknown group tag {tag!r}")
    return _FLAT_LAWS[tag][0](p, q)


def extended_inv(tag: str, p, context: GroupContext = DEFAULT_CONTEXT):
    if isinstance(p, ExtendedPoint):
        if p.tag != tag:
            raise ValueError(f"tag mismatch: {p.tag!r} under {tag!r}")
        return ExtendedPoint(tag, tuple(extended_inv(tag, np.array(p.coords), context).tolist()))
    if tag == "Q":
        return _q_flatten(q_inv(_q_unflatten(p), context))
    if tag not in _FLAT_LAWS:
        raise ValueError(f"unknown group tag {tag!r}")
    return _FLAT_LAWS[tag][1](p)


def extended_identity(tag: str) -> "ExtendedPoint":
    if tag == "Q":
        e = np.concatenate([np.zeros(3), np.eye(2).ravel(), np.eye(2).ravel()])
    else:
        e = flat_identity(tag)
    return ExtendedPoint(tag, tuple(e.tolist()))


# ---------------------------------------------------------------------------
# Scalar wrappers
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SL2Element:
    a: float
    b: float
    c: float
    d: float

    def __post_init__(self):
        m = sl2_validate(np.array([[self.a, self.b], [self.c, self.d]], dtype=float))
        for name, val in zip("abcd", m.ravel()):
            object.__setattr__(self, name, float(val))

    @classmethod
    def from_matrix(cls, m) -> "SL2Element":
        m = np.asarray(m, dtype=float)
        return cls(m[0, 0], m[0, 1], m[1, 0], m[1, 1])

    @classmethod
    def _trusted(cls, m) -> "SL2Element":
        # products of validated elements skip the input drift check
        obj = object.__new__(cls)
        for name, val in zip("abcd", np.asarray(m, dtype=float).ravel()):
            object.__setattr__(obj, name, float(val))
        return obj

    @classmethod
    def identity(cls) -> "SL2Element":
        return cls(1.0, 0.0, 0.0, 1.0)

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]])

    def __matmul__(self, other: "SL2Element") -> "SL2Element":
        return sl2_mul(self, other)

    def inverse(self) -> "SL2Element":
        return sl2_inv(self)


@dataclass(frozen=True)
class IwasawaFactors:
    phi: float
    t: float
    n: float
    order: str = "KNA"

    def __post_init__(self):
        if self.order not in ORDERS:
            raise ValueError(f"unknown Iwasawa order {self.order!r}")
        object.__setattr__(self, "phi", float(reduce_angle(self.phi)))

    def as_tuple(self) -> tuple:
        return self.phi, self.t, self.n


@dataclass(frozen=True)
class HeisenbergPoint:
    z: float
    y: float
    x: float

    @property
    def array(self) -> np.ndarray:
        return np.array([self.z, self.y, self.x], dtype=float)


@dataclass(frozen=True)
class JacobiElement:
    h: HeisenbergPoint
    m: SL2Element


@dataclass(frozen=True)
class ExtendedPoint:
    tag: str
    coords: tuple

    def __post_init__(self):
        dims = {"Q": 11, **{k: v[2] for k, v in _FLAT_LAWS.items()}}
        if self.tag not in dims:
            raise ValueError(f"unknown group tag {self.tag!r}")
        if len(self.coords) != dims[self.tag]:
            raise ValueError(f"{self.tag} expects {dims[self.tag]} coordinates, got {len(self.coords)}")
        for i in POSITIVE_SLOTS.get(self.tag, ()):
            if not self.coords[i] > 0:
                raise ValueError("multiplicative coordinate must be strictly positive")
        if self.tag == "Q":
            sl2_validate(np.array(self.coords[3:7]).reshape(2, 2))
            sl2_validate(np.array(self.coords[7:11]).reshape(2, 2))
