"""Random-sample checks of the group axioms for every law in ``groups``.

Failures are data, not exceptions: the checker is how the module documents
which (Heisenberg law, action) pairs actually form groups.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import groups as gr

AXIOM_TOL = 1e-10

ALL_TAGS = ("SL2", "H", "J", "Q", "E", "W", "V", "S", "B", "FRAK", "K6")


@dataclass
class AxiomReport:
    tag: str
    residuals: dict = field(default_factory=dict)
    tolerance: float = AXIOM_TOL
    sample_count: int = 0

    @property
    def passed(self) -> bool:
        return all(v <= self.tolerance for v in self.residuals.values())

    def to_dict(self) -> dict:
        return {
            "tag": self.tag,
            "residuals": dict(self.residuals),
            "tolerance": self.tolerance,
            "sample_count": self.sample_count,
            "pass": self.passed,
        }


def random_sl2(rng, n):
    phi = rng.uniform(0.0, gr.TWO_PI, n)
    t = rng.uniform(-1.0, 1.0, n)
    s = rng.uniform(-2.0, 2.0, n)
    return gr.iwasawa_compose_array(phi, t, s, "KNA")


def random_heis(rng, n):
    return rng.uniform(-2.0, 2.0, (n, 3))


def random_flat(tag, rng, n):
    dim = gr._FLAT_LAWS[tag][2]
    p = rng.uniform(-2.0, 2.0, (n, dim))
    for i in gr.POSITIVE_SLOTS[tag]:
        p[:, i] = np.exp(rng.uniform(-1.0, 1.0, n))
    return p


def _maxdiff(*pairs):
    return float(max(np.max(np.abs(np.asarray(a) - np.asarray(b))) for a, b in pairs))


def _tuple_diff(p, q):
    return max(_maxdiff((a, b)) for a, b in zip(p, q))


def _law(tag, context):
    """(sampler, mul, inv, identity, diff) for ``tag``."""
    if tag == "SL2":
        eye = lambda n: np.broadcast_to(np.eye(2), (n, 2, 2))
        return random_sl2, gr.sl2_mul, gr.sl2_inv, eye, _maxdiff_pair
    if tag == "H":
        return (
            random_heis,
            lambda p, q: gr.heis_mul(p, q, context.heis),
            lambda p: gr.heis_inv(p, context.heis),
            lambda n: np.zeros((n, 3)),
            _maxdiff_pair,
        )
    if tag == "J":
        return (
            lambda rng, n: (random_heis(rng, n), random_sl2(rng, n)),
            lambda p, q: gr.jacobi_mul(p, q, context),
            lambda p: gr.jacobi_inv(p, context),
            lambda n: gr.jacobi_identity((n,)),
            _tuple_diff,
        )
    if tag == "Q":
        return (
            lambda rng, n: (random_heis(rng, n), random_sl2(rng, n), random_sl2(rng, n)),
            lambda p, q: gr.q_mul(p, q, context),
            lambda p: gr.q_inv(p, context),
            lambda n: (np.zeros((n, 3)), np.broadcast_to(np.eye(2), (n, 2, 2)), np.broadcast_to(np.eye(2), (n, 2, 2))),
            _tuple_diff,
        )
    mul, inv, _ = gr._FLAT_LAWS[tag]
    return (
        lambda rng, n: random_flat(tag, rng, n),
        mul,
        inv,
        lambda n: gr.flat_identity(tag, (n,)),
        _maxdiff_pair,
    )


def _maxdiff_pair(p, q):
    return _maxdiff((p, q))


def _automorphism_residuals(tag, rng, n, context):
    out = {}
    if tag in ("H", "J", "Q"):
        m1, m2 = random_sl2(rng, n), random_sl2(rng, n)
        p, q = random_heis(rng, n), random_heis(rng, n)
        act = lambda m, v: gr.sl2_action(m, v, context.action)
        lhs = act(m1, gr.heis_mul(p, q, context.heis))
        rhs = gr.heis_mul(act(m1, p), act(m1, q), context.heis)
        out["automorphism"] = _maxdiff((lhs, rhs))
        out["action_homomorphism"] = _maxdiff((act(m1, act(m2, p)), act(gr.sl2_mul(m1, m2), p)))
    elif tag in ("E", "V"):
        b1, b2 = rng.uniform(-2, 2, n), rng.uniform(-2, 2, n)
        u, v = rng.uniform(-2, 2, (n, 2)), rng.uniform(-2, 2, (n, 2))
        out["automorphism"] = _maxdiff((gr.sigma(b1, u + v), gr.sigma(b1, u) + gr.sigma(b1, v)))
        out["action_homomorphism"] = _maxdiff((gr.sigma(b1, gr.sigma(b2, u)), gr.sigma(b1 + b2, u)))
    elif tag in ("W", "S", "B"):
        a1, a2 = np.exp(rng.uniform(-1, 1, n)), np.exp(rng.uniform(-1, 1, n))
        u, v = rng.uniform(-2, 2, n), rng.uniform(-2, 2, n)
        out["automorphism"] = _maxdiff((gr.varrho(a1, u + v), gr.varrho(a1, u) + gr.varrho(a1, v)))
        out["action_homomorphism"] = _maxdiff((gr.varrho(a1, gr.varrho(a2, u)), gr.varrho(a1 * a2, u)))
    return out


def check_group_axioms(
    tag: str,
    sample_count: int = 1000,
    seed: int = 0,
    context: gr.GroupContext | None = None,
    tolerance: float = AXIOM_TOL,
) -> AxiomReport:
    """Max residual of associativity, identity, inverse (and the action
    being by automorphisms, for semidirect laws) over random samples."""
    if sample_count < 1:
        raise ValueError("sample_count must be >= 1")
    if tag not in ALL_TAGS:
        raise ValueError(f"unknown group tag {tag!r}")
    if context is None:
        context = gr.DEFAULT_CONTEXT
    context = context.unchecked()
    rng = np.random.default_rng(seed)
    n = sample_count
    sample, mul, inv, ident, diff = _law(tag, context)
    p, q, r = sample(rng, n), sample(rng, n), sample(rng, n)
    e = ident(n)
    rep = AxiomReport(tag, tolerance=tolerance, sample_count=n)
    rep.residuals["associativity"] = diff(mul(mul(p, q), r), mul(p, mul(q, r)))
    rep.residuals["identity"] = max(diff(mul(e, p), p), diff(mul(p, e), p))
    pi = inv(p)
    rep.residuals["inverse"] = max(diff(mul(p, pi), e), diff(mul(pi, p), e))
    rep.residuals.update(_automorphism_residuals(tag, rng, n, context))
    return rep
