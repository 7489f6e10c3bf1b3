"""Numerical verification suites with structured reports.

Each suite builds its grids from a defaults table (overridable per axis
label), computes both sides of an identity by independent routes and
returns :class:`VerificationReport` objects.  Reports carry no timing in
their payload; runtimes are collected separately so that reruns with the
same configuration serialise identically.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import os
import time
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import groups as gr
from . import transforms as tr
from .axioms import ALL_TAGS, random_sl2, check_group_axioms
from .charts import kna_coords, kna_matrix
from .convolution import convolve_abelian, convolve_group, convolve_to_grid, lift_commutation_sides
from .funcspace import (
    LABELS,
    Field,
    SeparableFunction,
    gaussian_bump,
    involution,
    random_trig_poly,
    sample,
    separable_product,
    tau_lift,
    tilde_lift,
    trig_poly,
    upsilon_lift,
    xi_lift,
    zero_field,
)
from .quadrature import Axis, Grid, circle_axis, integer_axis, iwasawa_jacobian, line_axis, loga_axis, weighted_sum

REL_FLOOR = 1e-300
VERSION = 1

# tolerance, dominating error source
TOLERANCES = {
    "axioms": (1e-10, "floating-point roundoff in the group laws"),
    "iwasawa": (1e-12, "roundoff in atan2/hypot/log"),
    "haar": (1e-6, "truncation of the n and t boxes"),
    "n-substitution": (1e-6, "n-quadrature after the a-conjugation stretches the integrand"),
    "parseval-circle": (1e-12, "none; the circle rule is exact below Nyquist"),
    "plancherel-g": (1e-7, "frequency-box truncation"),
    "inversion-g": (1e-6, "frequency-box truncation"),
    "parseval-h": (1e-7, "frequency-box truncation"),
    "plancherel-j": (1e-6, "node count on the line axes"),
    "lift-commutation": (5e-2, "8-node rules on each of six axes"),
    "lift-commutation-mollifier": (5e-2, "mollifier width (second-order smoothing bias)"),
    "intertwining": (1e-6, "node count of the group-side grid"),
    "intertwining-xi": (1e-3, "node count on the five-dimensional grids"),
    "lifts": (1e-12, "roundoff in the KNA recomposition"),
    "span-closure": (1e-6, "lattice spacing of the translate family"),
}

# negative controls must exceed their tolerance by this factor
POWER = {
    "haar.rho0_control": 10.0,
    "intertwining.wrong_measure_control": 1e3,
    "plancherel-j.unsquared_control": 10.0,
    "span-closure.single_bump_control": 1e3,
}

# (L, N) per axis label for each suite; labels can be overridden from the CLI
DEFAULTS = {
    "axioms": {"samples": 1000},
    "iwasawa": {"samples": 1000},
    "haar": {"phi": [None, 64], "n": [12.0, 256], "t": [3.0, 128]},
    "parseval-circle": {"phi": [None, 64], "degree": 8},
    "plancherel-g": {"phi": [None, 64], "n": [10.0, 256], "t": [10.0, 256], "xi": [12.0, 256], "lam": [12.0, 256]},
    "inversion-g": {"phi": [None, 64], "n": [10.0, 256], "t": [10.0, 256], "xi": [12.0, 256], "lam": [12.0, 256]},
    "parseval-h": {"z": [8.0, 128], "y": [8.0, 128], "x": [8.0, 128],
                   "eta1": [12.0, 128], "eta2": [12.0, 128], "eta3": [12.0, 128]},
    "plancherel-j": {"z": [10.0, 256], "y": [10.0, 256], "x": [10.0, 256], "phi": [None, 64],
                     "n": [10.0, 256], "t": [10.0, 256], "freq": [12.0, 256]},
    "lift-commutation": {"z": [1.4, 8], "y": [1.4, 8], "x": [1.4, 8], "phi": [None, 8], "n": [1.4, 8], "t": [1.4, 8],
              "points": 5},
    "intertwining": {"z": [7.0, 57], "y": [7.0, 57], "x": [7.0, 57], "a": [7.0, 57],
                     "sn": [5.0, 161], "st": [2.0, 41], "kn": [6.0, 193], "kt": [2.5, 48],
                     "mz": [4.5, 14], "my": [3.6, 14], "mx": [3.6, 14], "msn": [3.6, 28], "mst": [1.6, 20],
                     "points": 50, "xi_points": 20},
    "lifts": {"samples": 100},
    "span-closure": {"x": [10.0, 401], "spacing": 0.7},
}


@dataclass
class RunConfig:
    suites: tuple = ("all",)
    grid: dict = field(default_factory=dict)
    trunc: dict = field(default_factory=dict)
    heis: str = "symplectic"
    action: str = "inverse_left"
    s_measure: str = "left_haar"
    seed: int = 0
    samples: int | None = None

    @property
    def context(self) -> gr.GroupContext:
        return gr.GroupContext(self.heis, self.action, self.s_measure, validate=False)

    def to_dict(self) -> dict:
        return {
            "suites": list(self.suites),
            "grid": dict(sorted(self.grid.items())),
            "trunc": dict(sorted(self.trunc.items())),
            "heis": self.heis,
            "action": self.action,
            "s_measure": self.s_measure,
            "seed": self.seed,
            "samples": self.samples,
        }

    def LN(self, suite: str, label: str):
        L, N = DEFAULTS[suite][label]
        return float(self.trunc.get(label, L)) if L is not None else None, int(self.grid.get(label, N))

    def count(self, suite: str, key: str) -> int:
        if key == "samples" and self.samples is not None:
            return int(self.samples)
        return int(DEFAULTS[suite][key])

    def rng(self, suite: str):
        return np.random.default_rng([self.seed, zlib.crc32(suite.encode())])


def _c(z) -> list:
    z = complex(z)
    return [z.real, z.imag]


@dataclass
class VerificationReport:
    name: str
    lhs: object
    rhs: object
    abs_err: float
    rel_err: float
    tolerance: float
    grid_spec: dict
    negative_control: bool = False
    power: float = 1.0
    details: dict = field(default_factory=dict)
    runtime_ms: int = 0

    @property
    def passed(self) -> bool:
        """Raw comparison ``rel_err <= tolerance``."""
        return bool(self.rel_err <= self.tolerance)

    @property
    def ok(self) -> bool:
        """Scored outcome: negative controls must fail by ``power``."""
        if self.negative_control:
            return bool(self.rel_err > self.power * self.tolerance)
        return self.passed

    def to_dict(self) -> dict:
        def enc(v):
            if isinstance(v, (list, tuple, np.ndarray)):
                return [_c(x) for x in np.asarray(v).reshape(-1)]
            return _c(v)

        return {
            "name": self.name,
            "lhs": enc(self.lhs),
            "rhs": enc(self.rhs),
            "abs_err": float(self.abs_err),
            "rel_err": float(self.rel_err),
            "tolerance": float(self.tolerance),
            "pass": self.passed,
            "negative_control": self.negative_control,
            "power": float(self.power),
            "ok": self.ok,
            "grid_spec": self.grid_spec,
            "grid_hash": grid_hash(self.grid_spec),
            "details": self.details,
        }

    def summary_values(self):
        """Scalar lhs/rhs for flat output: the worst point for sequences."""
        l, r = np.atleast_1d(np.asarray(self.lhs)), np.atleast_1d(np.asarray(self.rhs))
        l, r = np.broadcast_arrays(l, r)
        i = int(np.argmax(np.abs(l - r))) if l.size else 0
        return complex(l.reshape(-1)[i]), complex(r.reshape(-1)[i])


def grid_hash(spec) -> str:
    return hashlib.sha256(json.dumps(spec, sort_keys=True).encode()).hexdigest()[:16]


def make_report(name, lhs, rhs, tolerance, grid_spec, *, mode="sup", scale=None,
                negative=False, details=None) -> VerificationReport:
    """Build a report; ``mode`` picks how sequences are compared.

    ``sup``: ``max|l - r| / max(max|l|, floor)``.  ``pointwise``: the
    largest per-point relative error.  ``scale`` replaces the denominator
    (residual-type reports use ``scale=1``).
    """
    l = np.asarray(lhs, dtype=complex)
    r = np.asarray(rhs, dtype=complex)
    diff = np.abs(l - r)
    abs_err = float(np.max(diff)) if diff.size else 0.0
    if scale is not None:
        rel = abs_err / scale
    elif mode == "pointwise":
        rel = float(np.max(diff / np.maximum(np.abs(l), REL_FLOOR))) if diff.size else 0.0
    else:
        rel = abs_err / max(float(np.max(np.abs(l))) if l.size else 0.0, REL_FLOOR)
    lhs_out = l if l.ndim else complex(l)
    rhs_out = r if r.ndim else complex(r)
    return VerificationReport(
        name, lhs_out, rhs_out, abs_err, rel, tolerance, grid_spec,
        negative_control=negative, power=POWER.get(name, 1.0), details=details or {},
    )


def _spec(grid: Grid) -> list:
    return grid.spec()


# ---------------------------------------------------------------------------
# suites
# ---------------------------------------------------------------------------


def suite_axioms(cfg: RunConfig):
    n = cfg.count("axioms", "samples")
    tol = TOLERANCES["axioms"][0]
    out = []
    for i, tag in enumerate(ALL_TAGS):
        rep = check_group_axioms(tag, n, seed=cfg.seed + i, context=cfg.context, tolerance=tol)
        res = max(rep.residuals.values())
        out.append(make_report(f"axioms.{tag}", res, 0.0, tol, {"samples": n}, scale=1.0,
                               details={k: float(v) for k, v in sorted(rep.residuals.items())}))
    return out


def random_unimodular(rng, n, bound=10.0):
    """Random SL(2) matrices from normalised Gaussian 2x2 matrices."""
    out = []
    while sum(len(o) for o in out) < n:
        m = rng.normal(size=(2 * n, 2, 2))
        d = np.linalg.det(m)
        m[d < 0, :, 0] *= -1
        d = np.abs(d)
        keep = d > 1e-3
        m = m[keep] / np.sqrt(d[keep])[:, None, None]
        out.append(m[np.max(np.abs(m), axis=(1, 2)) <= bound])
    return np.concatenate(out)[:n]


def suite_iwasawa(cfg: RunConfig):
    n = cfg.count("iwasawa", "samples")
    g = random_unimodular(cfg.rng("iwasawa"), n)
    tol = TOLERANCES["iwasawa"][0]
    out = []
    for order in gr.ORDERS:
        phi, t, s = gr.iwasawa_decompose_array(g, order)
        res = float(np.max(np.abs(gr.iwasawa_compose_array(phi, t, s, order) - g)))
        out.append(make_report(f"iwasawa.{order}", res, 0.0, tol, {"samples": n}, scale=1.0))
    return out


def haar_test_function(beta=1.5):
    """Smooth, rapidly decaying, non-symmetric function of the matrix entries."""

    def f(g):
        a, b, c, d = g[..., 0, 0], g[..., 0, 1], g[..., 1, 0], g[..., 1, 1]
        return np.exp(-beta * (a * a + b * b + c * c + d * d - 2.0) + 0.3 * (a - d) + 0.2 * b)

    return f


def haar_integrals(cfg: RunConfig, rho: float = 1.0):
    _, M = cfg.LN("haar", "phi")
    Ln, Nn = cfg.LN("haar", "n")
    Lt, Nt = cfg.LN("haar", "t")
    grid = Grid((circle_axis(M), line_axis(Ln, Nn, label="n"), loga_axis(Lt, Nt)))
    P, Nm, T = grid.mesh()
    f = haar_test_function()
    vals = {}
    for order in ("ANK", "NAK", "KAN", "KNA"):
        v = f(gr.iwasawa_compose_array(P, T, Nm, order)) * iwasawa_jacobian(T, order, rho)
        vals[order] = weighted_sum(v, grid)
    return vals, grid


def n_substitution_check(cfg: RunConfig, points=12):
    """n-integral of ``f(k n a) e^{-i xi n}`` against its KAN rewriting.

    With ``k a(t) n(n') = k n(e^{2t} n') a(t)`` the two integrals agree
    pointwise in ``(phi, t, xi)`` after the substitution ``n = e^{2t} n'``.
    """
    rng = cfg.rng("n-substitution")
    Ln, Nn = cfg.LN("haar", "n")
    n_ax = line_axis(Ln, Nn, label="n")
    f = haar_test_function()
    phi = rng.uniform(0, 2 * np.pi, points)
    t = rng.uniform(-0.6, 0.6, points)
    xi = rng.uniform(-3, 3, points)
    s = n_ax.nodes[None, :]
    w = n_ax.weights
    I1 = np.sum(f(gr.iwasawa_compose_array(phi[:, None], t[:, None], s, "KNA")) * np.exp(-1j * xi[:, None] * s) * w, axis=1)
    e2t = np.exp(2 * t)[:, None]
    I2 = np.sum(f(gr.iwasawa_compose_array(phi[:, None], t[:, None], s, "KAN")) * np.exp(-1j * xi[:, None] * e2t * s) * e2t * w, axis=1)
    return I1, I2, n_ax


def suite_haar(cfg: RunConfig):
    tol = TOLERANCES["haar"][0]
    vals, grid = haar_integrals(cfg)
    spec = _spec(grid)
    out = [make_report(f"haar.ANK_vs_{o}", vals["ANK"], vals[o], tol, spec) for o in ("NAK", "KAN", "KNA")]
    I1, I2, n_ax = n_substitution_check(cfg)
    out.append(make_report("haar.n_substitution", I1, I2, TOLERANCES["n-substitution"][0], [n_ax.spec()]))
    bad, _ = haar_integrals(cfg, rho=0.0)
    out.append(make_report("haar.rho0_control", vals["ANK"], bad["KAN"], tol, spec, negative=True,
                           details={"note": "KAN integral without its a^(2 rho) Jacobian"}))
    return out


def suite_parseval_circle(cfg: RunConfig):
    _, M = cfg.LN("parseval-circle", "phi")
    deg = cfg.count("parseval-circle", "degree")
    ax = circle_axis(M)
    f = random_trig_poly(deg, cfg.rng("parseval-circle"))
    F = sample(f, Grid((ax,)))
    lhs = weighted_sum(np.abs(F.values) ** 2, F.grid)
    C = tr.circle_ft(F)
    rhs = float(np.sum(np.abs(C.values) ** 2))
    return [make_report("parseval-circle.random_degree", lhs, rhs, TOLERANCES["parseval-circle"][0],
                        [ax.spec()], details={"degree": deg})]


def _g_grid(cfg, suite):
    _, M = cfg.LN(suite, "phi")
    Ln, Nn = cfg.LN(suite, "n")
    Lt, Nt = cfg.LN(suite, "t")
    grid = Grid((circle_axis(M), line_axis(Ln, Nn, label="n"), loga_axis(Lt, Nt)))
    Lx, Nx = cfg.LN(suite, "xi")
    Ll, Nl = cfg.LN(suite, "lam")
    return grid, tr.frequency_axis("xi", Lx, Nx), tr.frequency_axis("lam", Ll, Nl)


def g_test_functions():
    G = lambda lab, s=1.0, c=0.0: gaussian_bump((lab,), s, c)
    labels = LABELS["G"]
    f1 = separable_product(labels, {"phi": trig_poly({1: 1.0}), "n": G("n"), "t": G("t")})
    f2 = SeparableFunction(labels, [
        (1.0, {"phi": trig_poly({1: 1.0}), "n": G("n", 1.0, 1.0), "t": G("t")}),
        (0.5 - 0.25j, {"phi": trig_poly({-2: 1.0, 0: 0.5}), "n": G("n", 0.8), "t": G("t", 0.7, -0.5)}),
    ])
    return {"character_gaussian": f1, "two_term_sum": f2}


def suite_plancherel_g(cfg: RunConfig):
    grid, xi, lam = _g_grid(cfg, "plancherel-g")
    tol = TOLERANCES["plancherel-g"][0]
    out = []
    for name, f in g_test_functions().items():
        F = sample(f, grid)
        S = tr.g_ft(F, xi=xi, lam=lam)
        lhs = weighted_sum(np.abs(F.values) ** 2, grid)
        rhs = tr.plancherel_constant(2) * weighted_sum(np.abs(S.values) ** 2, S.grid)
        out.append(make_report(f"plancherel-g.{name}", lhs, rhs, tol, _spec(grid) + [xi.spec(), lam.spec()]))
    return out


def suite_inversion_g(cfg: RunConfig):
    grid, xi, lam = _g_grid(cfg, "inversion-g")
    G = lambda lab, s=1.0, c=0.0: gaussian_bump((lab,), s, c)
    f = separable_product(LABELS["G"], {"phi": trig_poly({0: 1.0, 2: 0.5}), "n": G("n", 1.2, 0.3), "t": G("t", 0.9)})
    F = sample(f, grid)
    S = tr.g_ft(F, xi=xi, lam=lam)
    lhs = complex(f(0.0, 0.0, 0.0))
    rhs = tr.plancherel_constant(2) * weighted_sum(S.values, S.grid)
    return [make_report("inversion-g.identity_value", lhs, rhs, TOLERANCES["inversion-g"][0],
                        _spec(grid) + [xi.spec(), lam.spec()])]


def suite_parseval_h(cfg: RunConfig):
    s = "parseval-h"
    axes = tuple(line_axis(*cfg.LN(s, lab), label=lab) for lab in ("z", "y", "x"))
    grid = Grid(axes)
    eta = {lab: tr.frequency_axis(e, *cfg.LN(s, e)) for lab, e in zip(("z", "y", "x"), ("eta1", "eta2", "eta3"))}
    f = gaussian_bump(LABELS["N"], [1.0, 0.8, 0.9], [0.3, -0.2, 0.1])
    g = gaussian_bump(LABELS["N"], [0.9, 1.1, 0.8], [-0.1, 0.2, 0.25])
    spec = _spec(grid) + [a.spec() for a in eta.values()]
    tol = TOLERANCES[s][0]
    ctx = cfg.context
    out = []
    Ff = tr.heis_ft(sample(f, grid), eta)
    for name, h in (("parseval", g), ("plancherel", f)):
        # (h_check * f)(0) = int f(v^-1) h_check(v) dv = int f conj(h)
        hc = sample(involution(h, "N", ctx), grid)
        lhs = convolve_group(hc, f, "N", ([0.0], [0.0], [0.0]), ctx)[0]
        Fh = Ff if h is f else tr.heis_ft(sample(h, grid), eta)
        rhs = tr.plancherel_constant(3) * weighted_sum(Ff.values * np.conj(Fh.values), Ff.grid)
        out.append(make_report(f"parseval-h.{name}", lhs, rhs, tol, spec))
    return out


def j_test_function():
    labels = LABELS["J"]
    G = lambda lab, s=1.0, c=0.0: gaussian_bump((lab,), s, c)
    t1 = {"z": G("z"), "y": G("y", 0.8), "x": G("x", 0.9, 0.2), "phi": trig_poly({1: 1.0}), "n": G("n"), "t": G("t", 0.7)}
    t2 = {"z": G("z", 1.1, -0.3), "y": G("y"), "x": G("x"), "phi": trig_poly({-2: 1.0}), "n": G("n", 0.8, 0.5), "t": G("t")}
    return SeparableFunction(labels, [(1.0, t1), (0.5j, t2)])


def _j_axes(cfg):
    s = "plancherel-j"
    space, freq = {}, {}
    Lf, Nf = cfg.LN(s, "freq")
    fl = {"z": "eta1", "y": "eta2", "x": "eta3", "n": "xi", "t": "lam"}
    for lab in LABELS["J"]:
        L, N = cfg.LN(s, lab)
        if lab == "phi":
            space[lab] = circle_axis(N)
            freq[lab] = integer_axis(-(N // 2 - 1), N // 2 - 1, "m")
        else:
            space[lab] = line_axis(L, N, label=lab, measure_tag="multiplicative_log" if lab == "t" else "lebesgue")
            freq[lab] = tr.frequency_axis(fl[lab], Lf, Nf)
    return space, freq


def separable_inner(psi: SeparableFunction, space: dict) -> complex:
    """``int psi conj(psi)`` as a sum over term pairs of 1-D products."""
    prof = {}
    for k in range(len(psi.terms)):
        for lab in psi.labels:
            ax = space[lab]
            prof[k, lab] = psi.profile(k, lab)(ax.nodes)
    total = 0j
    for i, (ci, _) in enumerate(psi.terms):
        for j, (cj, _) in enumerate(psi.terms):
            p = ci * np.conj(cj)
            for lab in psi.labels:
                p *= np.sum(prof[i, lab] * np.conj(prof[j, lab]) * space[lab].weights)
            total += p
    return complex(total)


def spectrum_inner(S: tr.SeparableSpectrum, squared=True) -> complex:
    total = 0j
    if not squared:
        if len(S.terms) != 1:
            raise ValueError("the unsquared functional factorises only for single-term spectra")
        c, spec = S.terms[0]
        p = abs(c)
        for lab in S.labels:
            p *= np.sum(np.abs(spec[lab].values) * spec[lab].grid.axes[0].weights)
        return complex(p)
    for ci, si in S.terms:
        for cj, sj in S.terms:
            p = ci * np.conj(cj)
            for lab in S.labels:
                p *= np.sum(si[lab].values * np.conj(sj[lab].values) * si[lab].grid.axes[0].weights)
            total += p
    return complex(total)


def suite_plancherel_j(cfg: RunConfig):
    space, freq = _j_axes(cfg)
    tol = TOLERANCES["plancherel-j"][0]
    spec = [a.spec() for a in space.values()] + [a.spec() for a in freq.values()]
    psi = j_test_function()
    S = tr.jacobi_ft(psi, space, freq)
    out = [make_report("plancherel-j.two_term", separable_inner(psi, space),
                       tr.plancherel_constant(5) * spectrum_inner(S), tol, spec)]
    single = SeparableFunction(psi.labels, psi.terms[:1])
    S1 = tr.jacobi_ft(single, space, freq)
    out.append(make_report("plancherel-j.unsquared_control", separable_inner(single, space),
                           tr.plancherel_constant(5) * spectrum_inner(S1, squared=False), tol, spec,
                           negative=True, details={"note": "absolute value instead of its square"}))
    return out


def lift_commutation_grids(cfg: RunConfig):
    s = "lift-commutation"
    ax = []
    ax2 = []
    for lab in LABELS["J"]:
        L, N = cfg.LN(s, lab)
        if lab == "phi":
            ax.append(circle_axis(N, "phi"))
            ax2.append(circle_axis(N, "phi", offset=0.5))
        else:
            ax.append(line_axis(L, N, "trapezoid", lab))
            ax2.append(line_axis(L, N, "gauss_legendre", lab))
    return Grid(tuple(ax)), Grid(tuple(ax2))


def lift_commutation_functions():
    J = LABELS["J"]
    rest = ("z", "y", "x", "n", "t")
    gp = gaussian_bump(rest, 0.35)
    gf = gaussian_bump(rest, 1.5, [0.0, 0.2, 0.0, -0.1, 0.1])
    psi = Field(J, lambda z, y, x, phi, n, t: gp(z, y, x, n, t) + 0.0 * phi, "gaussian_bump")
    f = Field(J, lambda z, y, x, phi, n, t: gf(z, y, x, n, t) * np.exp(0.5 * np.cos(phi)), "gaussian_bump")
    return psi, f


def mollifier_J(width=0.03, nodes=8):
    """Unit-mass narrow bump at the identity of J, with its own grid."""
    J = LABELS["J"]
    axes = []
    for lab in J:
        a = line_axis(4 * width, nodes, "gauss_legendre", lab)
        if lab == "phi":
            a = Axis("phi", a.nodes, a.weights / (2 * np.pi), "lebesgue")
        axes.append(a)
    grid = Grid(tuple(axes))
    bump = gaussian_bump(J, width)
    mass = weighted_sum(sample(bump, grid).values, grid).real
    return bump.scale(1.0 / mass), grid


def lift_commutation_points(cfg: RunConfig, P: int):
    rng = cfg.rng("lift-commutation")
    X = [rng.uniform(-0.5, 0.5, P) for _ in range(3)]
    M1 = [rng.uniform(0, 2 * np.pi, P), rng.uniform(-0.5, 0.5, P), rng.uniform(-0.3, 0.3, P)]
    M2 = [rng.uniform(0, 2 * np.pi, P), rng.uniform(-0.5, 0.5, P), rng.uniform(-0.3, 0.3, P)]
    return X + M1 + M2


def suite_lift_commutation(cfg: RunConfig):
    tol = TOLERANCES["lift-commutation"][0]
    P = cfg.count("lift-commutation", "points")
    ctx = cfg.context
    grid, grid2 = lift_commutation_grids(cfg)
    psi, f = lift_commutation_functions()
    pts = lift_commutation_points(cfg, P)
    spec = {"left": _spec(grid), "right": _spec(grid2)}
    lhs, rhs = lift_commutation_sides(psi, f, pts, grid, grid2, ctx)
    out = [make_report("lift-commutation.gaussian_pair", lhs, rhs, tol, spec, mode="pointwise")]
    mol, mgrid = mollifier_J()
    l2, r2 = lift_commutation_sides(mol, f, pts, mgrid, None, ctx)
    target = tilde_lift(f, ctx)(*pts)
    mtol = TOLERANCES["lift-commutation-mollifier"][0]
    out.append(make_report("lift-commutation.mollifier_left", target, l2, mtol, {"grid": _spec(mgrid)}, mode="pointwise"))
    out.append(make_report("lift-commutation.mollifier_right", target, r2, mtol, {"grid": _spec(mgrid)}, mode="pointwise"))
    l0, r0 = lift_commutation_sides(psi, zero_field(LABELS["J"]), pts, grid, grid2, ctx)
    out.append(make_report("lift-commutation.zero_function", l0, r0, 0.0, spec, mode="pointwise"))
    return out


# -- intertwining -----------------------------------------------------------


def _ax(cfg, lab, label=None, scheme="trapezoid"):
    L, N = cfg.LN("intertwining", lab)
    return line_axis(L, N, scheme, label or lab)


def intertwine_N(cfg: RunConfig, u: Field, f: Field, pts, extra_weight=None):
    """Group path on polarized N against the abelian path on FRAK.

    Group: ``(u * f)(n, b) = int f(sigma(-c)(n - m), b - c) u(m, c)``.
    Abelian: ``int tau f(q, b) u((n, 0) - q) dq`` over FRAK, with ``b``
    frozen, evaluated at ``a = 0``.
    """
    gN = Grid((_ax(cfg, "z"), _ax(cfg, "y"), _ax(cfg, "x")))
    U = sample(u, gN)
    if extra_weight is not None:
        U = type(U)(gN, U.values * extra_weight(*gN.mesh()))
    B = convolve_group(U, f, "N", pts, heis="polarized")
    gF = Grid((_ax(cfg, "z", scheme="midpoint"), _ax(cfg, "y", scheme="midpoint"), _ax(cfg, "a", scheme="midpoint")))
    tf = tau_lift(f, "E_additive")
    uF = u.relabel(LABELS["FRAK"])
    A = np.empty_like(B)
    for i, (pz, py, b) in enumerate(zip(*pts)):
        tfb = Field(LABELS["FRAK"], lambda z, y, a, b=b: tf(z, y, a, b + 0.0 * a))
        A[i] = convolve_abelian(sample(tfb, gF), uF, "FRAK", ([pz], [py], [0.0]))[0]
    return A, B, {"group": _spec(gN), "abelian": _spec(gF)}


def intertwine_S(cfg: RunConfig, u: Field, f: Field, pts, s_measure=None):
    """Group path on S against the abelian path on K6.

    With left Haar ``dn dt e^{-2t}`` the abelian side convolves the
    modular-corrected kernel ``u(m, s) e^{-2s}`` with the W-extension of f.
    """
    ctx = gr.GroupContext(s_measure=s_measure or cfg.s_measure, validate=False)
    gS = Grid((_ax(cfg, "sn", "n"), loga_axis(*cfg.LN("intertwining", "st"))))
    B = convolve_group(sample(u, gS), f, "S", pts, context=ctx)
    gK = Grid((_ax(cfg, "kn", "n", "gauss_legendre"), _ax(cfg, "kt", "t", "gauss_legendre")))
    tf = tau_lift(f, "W_multiplicative")
    ut = Field(LABELS["K6"], lambda n, t: u(n, t) * np.exp(-2.0 * t))
    A = np.empty_like(B)
    for i, (pn, tb) in enumerate(zip(*pts)):
        tfb = Field(LABELS["K6"], lambda n, t, tb=tb: tf(n, t, tb + 0.0 * t))
        A[i] = convolve_abelian(sample(tfb, gK), ut, "K6", ([pn], [0.0]))[0]
    return A, B, {"group": _spec(gS), "abelian": _spec(gK), "s_measure": ctx.s_measure}


def intertwine_M(cfg: RunConfig, u: Field, f: Field, pts):
    """Group path on M = N x S against the B-companion path via the Xi lift."""
    labs = ("mz", "my", "mx", "msn", "mst")
    gM = Grid(tuple(_ax(cfg, l, m) for l, m in zip(labs, LABELS["M"])))
    ctx = cfg.context
    B = convolve_group(sample(u, gM), f, "M", pts, context=ctx, heis="polarized")
    gB = Grid(tuple(_ax(cfg, l, m, "midpoint") for l, m in zip(labs, LABELS["B"])))
    uB = sample(u.relabel(LABELS["B"]), gB)
    xf = xi_lift(f)
    A = np.empty_like(B)
    for i, p in enumerate(zip(*pts)):
        v = Field(LABELS["B"], lambda n3, n2, n1, sn, st, n4=p[2]: xf(n3, n2, n1, n4 + 0.0 * n3, sn, st))
        A[i] = convolve_abelian(uB, v, "B", ([p[0]], [p[1]], [0.0], [p[3]], [p[4]]), context=ctx)[0]
    return A, B, {"group": _spec(gM), "companion": _spec(gB)}


def intertwining_functions():
    return {
        "N": (gaussian_bump(LABELS["N"], [0.8, 0.7, 0.6], [0.2, -0.1, 0.3]),
              gaussian_bump(LABELS["N"], [1.0, 0.9, 0.8], [-0.3, 0.2, 0.1])),
        "S": (gaussian_bump(LABELS["S"], [0.6, 0.3], [-0.1, 0.05]),
              gaussian_bump(LABELS["S"], [1.0, 0.8], [0.2, -0.1])),
        "M": (gaussian_bump(LABELS["M"], [0.6, 0.6, 0.6, 0.6, 0.2], [0.0, 0.1, -0.1, 0.0, 0.0]),
              gaussian_bump(LABELS["M"], [1.0, 0.9, 0.9, 1.2, 0.8], [0.2, -0.1, 0.1, 0.1, 0.0])),
    }


def intertwining_points(cfg: RunConfig):
    rng = cfg.rng("intertwining")
    P = cfg.count("intertwining", "points")
    Q = cfg.count("intertwining", "xi_points")
    pN = [rng.uniform(-1, 1, P) for _ in range(3)]
    pS = [rng.uniform(-1, 1, P), rng.uniform(-0.5, 0.5, P)]
    pM = [rng.uniform(-1, 1, Q) for _ in range(4)] + [rng.uniform(-0.5, 0.5, Q)]
    return pN, pS, pM


def suite_intertwining(cfg: RunConfig):
    fns = intertwining_functions()
    pN, pS, pM = intertwining_points(cfg)
    tol = TOLERANCES["intertwining"][0]
    out = []
    A, B, spec = intertwine_N(cfg, *fns["N"], pN)
    out.append(make_report("intertwining.N_lambda", B, A, tol, spec))
    A, B, spec = intertwine_S(cfg, *fns["S"], pS)
    out.append(make_report("intertwining.S_chi", B, A, tol, spec))
    A, B, spec = intertwine_M(cfg, *fns["M"], pM)
    out.append(make_report("intertwining.M_xi", B, A, TOLERANCES["intertwining-xi"][0], spec))
    wrong = "right_haar" if cfg.s_measure == "left_haar" else "left_haar"
    A, B, spec = intertwine_S(cfg, *fns["S"], pS, s_measure=wrong)
    out.append(make_report("intertwining.wrong_measure_control", B, A, tol, spec, negative=True,
                           details={"note": f"group side integrated with the {wrong} measure"}))
    return out


# -- lifts ------------------------------------------------------------------


def lift_residuals(cfg: RunConfig):
    rng = cfg.rng("lifts")
    n = cfg.count("lifts", "samples")
    ctx = cfg.context
    G = LABELS["G"]
    fG = Field(G, lambda phi, n_, t: np.exp(-n_ ** 2 / 2 - t ** 2 + 1j * np.sin(phi) + 0.3 * np.cos(2 * phi) * n_))
    Y = upsilon_lift(fG)
    phi, s, t = rng.uniform(0, 2 * np.pi, n), rng.uniform(-2, 2, n), rng.uniform(-1, 1, n)
    k1, th = rng.uniform(0, 2 * np.pi, n), rng.uniform(0, 2 * np.pi, n)
    gh = kna_coords(kna_matrix(phi, s, t) @ gr.rotation(th))
    res = {"upsilon": float(np.max(np.abs(Y(*gh, k1 - th) - Y(phi, s, t, k1))))}

    fN = gaussian_bump(LABELS["N"], [1.0, 0.8, 0.9], [0.2, -0.3, 0.1])
    tE = tau_lift(fN, "E_additive")
    z, y, a, b, x = (rng.uniform(-2, 2, n) for _ in range(5))
    res["tau_E"] = float(np.max(np.abs(tE(z - x * y, y, a + x, b - x) - tE(z, y, a, b))))

    fS = gaussian_bump(LABELS["S"], [1.0, 0.7], [0.1, 0.0])
    tW = tau_lift(fS, "W_multiplicative")
    m, ta, tb, tx = rng.uniform(-2, 2, n), rng.uniform(-1, 1, n), rng.uniform(-1, 1, n), rng.uniform(-1, 1, n)
    res["tau_W"] = float(np.max(np.abs(tW(np.exp(-2 * tx) * m, ta + tx, tb - tx) - tW(m, ta, tb))))

    gJ = gaussian_bump(("z", "y", "x", "n", "t"), [1.0, 0.9, 1.1, 1.0, 0.8])
    fJ = Field(LABELS["J"], lambda z, y, x, phi, s, t: gJ(z, y, x, s, t) * np.exp(1j * phi))
    ft = tilde_lift(fJ, ctx)
    X = rng.uniform(-1, 1, (n, 3))
    M1, M2, Nm = random_sl2(rng, n), random_sl2(rng, n), random_sl2(rng, n)
    Ninv = gr.sl2_inv(Nm)
    X2 = gr.sl2_action(Ninv, X, ctx.action)
    lhs = ft(X2[:, 0], X2[:, 1], X2[:, 2], *kna_coords(M1 @ Nm), *kna_coords(Ninv @ M2))
    rhs = ft(X[:, 0], X[:, 1], X[:, 2], *kna_coords(M1), *kna_coords(M2))
    res["tilde"] = float(np.max(np.abs(lhs - rhs)))
    return res


def suite_lifts(cfg: RunConfig):
    tol = TOLERANCES["lifts"][0]
    n = cfg.count("lifts", "samples")
    return [make_report(f"lifts.{k}_invariance", v, 0.0, tol, {"samples": n}, scale=1.0)
            for k, v in lift_residuals(cfg).items()]


# -- span closure -------------------------------------------------------------


def span_closure_residual(family, u, group_tag: str, images=None, cond_limit: float = 1e8):
    """Relative least-squares residual of ``u * f_i`` against ``span(family)``.

    ``family`` is a sequence of GridFunctions on one grid; ``images`` picks
    which members are convolved (default all).  Returns ``(residual,
    gram_condition)``.  This measures closure of a finite family; it does
    not certify an ideal.
    """
    grid = family[0].grid
    w = grid.flat_weights()
    F = np.stack([g.values.reshape(-1) for g in family])
    gram = (F * w) @ F.conj().T
    cond = float(np.linalg.cond(gram)) if len(family) > 1 else 1.0
    if cond >= cond_limit:
        raise ValueError(f"family is ill-conditioned: Gram condition {cond:.3g} >= {cond_limit:.3g}")
    sw = np.sqrt(w)
    A = (F * sw).T
    idx = range(len(family)) if images is None else images
    worst = 0.0
    for i in idx:
        img = convolve_to_grid(u, family[i], group_tag, grid).values.reshape(-1) * sw
        nrm = np.linalg.norm(img)
        if nrm == 0:
            continue
        coef, *_ = np.linalg.lstsq(A, img, rcond=None)
        worst = max(worst, float(np.linalg.norm(A @ coef - img) / nrm))
    return worst, cond


def suite_span_closure(cfg: RunConfig):
    tol = TOLERANCES["span-closure"][0]
    L, N = cfg.LN("span-closure", "x")
    h = float(DEFAULTS["span-closure"]["spacing"])
    grid = Grid((line_axis(L, N, label="x"),))
    centres = np.arange(-6.0, 6.0 + 1e-9, h)
    fam = [sample(gaussian_bump(("x",), 1.0, c), grid) for c in centres]
    u = sample(gaussian_bump(("x",), 1.0, 0.0, 1.0 / np.sqrt(2 * np.pi)), grid)
    mid = len(centres) // 2
    res, cond = span_closure_residual(fam, u, "R", images=range(mid - 2, mid + 3))
    spec = _spec(grid)
    out = [make_report("span-closure.gaussian_translates", res, 0.0, tol, spec, scale=1.0,
                       details={"gram_condition": cond, "family_size": len(fam), "spacing": h})]
    single = [sample(gaussian_bump(("x",), 1.0, 0.0), grid)]
    res1, _ = span_closure_residual(single, u, "R")
    out.append(make_report("span-closure.single_bump_control", res1, 0.0, tol, spec, scale=1.0, negative=True))
    return out


SUITES = {
    "axioms": suite_axioms,
    "iwasawa": suite_iwasawa,
    "haar": suite_haar,
    "parseval-circle": suite_parseval_circle,
    "plancherel-g": suite_plancherel_g,
    "inversion-g": suite_inversion_g,
    "parseval-h": suite_parseval_h,
    "plancherel-j": suite_plancherel_j,
    "lift-commutation": suite_lift_commutation,
    "intertwining": suite_intertwining,
    "lifts": suite_lifts,
    "span-closure": suite_span_closure,
}


def resolve_suites(names) -> list:
    names = list(names)
    if "all" in names:
        return list(SUITES)
    unknown = [n for n in names if n not in SUITES]
    if unknown:
        raise KeyError(f"unknown suite(s): {', '.join(unknown)}; available: all, {', '.join(SUITES)}")
    return list(dict.fromkeys(names))


def max_workers() -> int:
    try:
        cap = int(os.environ.get("JH_THREADS", "0"))
    except ValueError:
        cap = 0
    n = os.cpu_count() or 1
    return max(1, min(n, cap) if cap > 0 else n)


def run_suites(cfg: RunConfig, threads: int | None = None):
    """Run the configured suites; returns ``(reports, runtimes_ms)``."""
    names = resolve_suites(cfg.suites)

    def job(name):
        t0 = time.perf_counter()
        reps = SUITES[name](cfg)
        ms = int(round((time.perf_counter() - t0) * 1000))
        for r in reps:
            r.runtime_ms = ms
        return reps, ms

    threads = threads or max_workers()
    with ThreadPoolExecutor(max_workers=min(threads, len(names))) as ex:
        results = list(ex.map(job, names))
    reports = [r for reps, _ in results for r in reps]
    runtimes = {n: ms for n, (_, ms) in zip(names, results)}
    return reports, runtimes


def payload(cfg: RunConfig, reports) -> dict:
    names = resolve_suites(cfg.suites)
    return {
        "version": VERSION,
        "defaults": {n: DEFAULTS[n] for n in names},
        "tolerances": {k: {"tolerance": v[0], "source": v[1]} for k, v in TOLERANCES.items()},
        "config": cfg.to_dict(),
        "reports": [r.to_dict() for r in reports],
    }


def to_json(cfg: RunConfig, reports, metadata: dict | None = None) -> str:
    doc = payload(cfg, reports)
    if metadata is not None:
        doc["metadata"] = metadata
    return json.dumps(doc, indent=2, sort_keys=False) + "\n"


CSV_COLUMNS = ("name", "lhs_re", "lhs_im", "rhs_re", "rhs_im", "abs_err", "rel_err",
               "tolerance", "pass", "runtime_ms", "grid_hash")


def to_csv(reports) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in reports:
        l, rr = r.summary_values()
        w.writerow([r.name, repr(l.real), repr(l.imag), repr(rr.real), repr(rr.imag), repr(r.abs_err),
                    repr(r.rel_err), repr(r.tolerance), r.passed, r.runtime_ms, grid_hash(r.grid_spec)])
    return buf.getvalue()
