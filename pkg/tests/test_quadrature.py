import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from jacobi_harmonic import groups as gr
from jacobi_harmonic.charts import kna_coords, kna_matrix
from jacobi_harmonic.funcspace import Field, gaussian_bump, sample
from jacobi_harmonic.quadrature import (
    Axis, Grid, LINE_SCHEMES, circle_axis, integer_axis, integrate, integrate_G, iwasawa_jacobian,
    line_axis, loga_axis, weighted_sum,
)


def circle_integral(fn, M=16):
    ax = circle_axis(M)
    return weighted_sum(fn(ax.nodes), Grid((ax,)))


def test_circle_constants_and_characters():
    assert circle_integral(np.ones_like) == pytest.approx(1.0, abs=1e-15)
    assert abs(circle_integral(lambda p: np.exp(1j * p))) < 1e-15
    assert circle_integral(lambda p: np.cos(p) ** 2) == pytest.approx(0.5, abs=1e-15)


@pytest.mark.parametrize("offset", [0.0, 0.5])
def test_circle_exact_below_nyquist(offset):
    ax = circle_axis(32, offset=offset)
    g = Grid((ax,))
    for m in range(1, 16):
        assert abs(weighted_sum(np.exp(1j * m * ax.nodes), g)) < 1e-14
    assert abs(weighted_sum(np.exp(32j * ax.nodes), g)) == pytest.approx(1.0)


def test_circle_axis_validation():
    with pytest.raises(ValueError):
        circle_axis(7)
    with pytest.raises(ValueError):
        circle_axis(8, offset=1.0)


def test_gaussian_line_integral():
    ax = line_axis(8.0, 128)
    got = weighted_sum(np.exp(-ax.nodes**2 / 2), Grid((ax,)))
    assert abs(got - np.sqrt(2 * np.pi)) <= 1e-12


@pytest.mark.parametrize("scheme", LINE_SCHEMES)
def test_every_scheme_integrates_gaussian(scheme):
    ax = line_axis(8.0, 128, scheme)
    got = weighted_sum(np.exp(-ax.nodes**2 / 2), Grid((ax,)))
    assert abs(got - np.sqrt(2 * np.pi)) <= 1e-10


def test_indicator_endpoint_convention():
    ax = line_axis(2.0, 9)
    x = ax.nodes
    vals = np.where(np.abs(x) < 1, 1.0, 0.0) + np.where(np.isclose(np.abs(x), 1.0), 0.5, 0.0)
    assert weighted_sum(vals, Grid((ax,))) == pytest.approx(2.0, abs=1e-15)


def test_midpoint_interleaves_trapezoid():
    tr, mp = line_axis(1.0, 5), line_axis(1.0, 4, "midpoint")
    assert np.all((mp.nodes > tr.nodes[:-1]) & (mp.nodes < tr.nodes[1:]))
    assert mp.weights.sum() == pytest.approx(2.0)


def test_line_axis_errors():
    with pytest.raises(ValueError):
        line_axis(1.0, 8, "simpson")
    with pytest.raises(ValueError):
        line_axis(-1.0, 8)
    with pytest.raises(ValueError):
        line_axis(1.0, 1)


def test_loga_axis_is_dt():
    ax = loga_axis(10.0, 201)
    assert ax.measure_tag == "multiplicative_log"
    # int_0^inf exp(-(log a)^2 / 2) da/a = sqrt(2 pi)
    a = np.exp(ax.nodes)
    assert weighted_sum(np.exp(-np.log(a) ** 2 / 2), Grid((ax,))) == pytest.approx(np.sqrt(2 * np.pi), abs=1e-12)


def test_axis_invariants():
    with pytest.raises(ValueError):
        Axis("x", np.array([1.0, 0.0]), np.ones(2))
    with pytest.raises(ValueError):
        Axis("x", np.array([0.0, 1.0]), np.array([1.0, -1.0]))
    with pytest.raises(ValueError):
        Axis("x", np.array([0.0]), np.ones(1), "bogus")
    with pytest.raises(ValueError):
        Grid((line_axis(1, 3, label="x"), line_axis(1, 3, label="x")))
    m = integer_axis(-2, 2)
    assert m.nodes.tolist() == [-2, -1, 0, 1, 2] and m.measure_tag == "counting"


def test_axis_json_roundtrip():
    ax = line_axis(2.0, 7, "gauss_legendre", "t", "multiplicative_log")
    back = Axis.from_json(ax.to_json())
    assert np.array_equal(back.nodes, ax.nodes) and np.array_equal(back.weights, ax.weights)
    assert back.measure_tag == ax.measure_tag


def test_weighted_sum_shape_check():
    with pytest.raises(ValueError):
        weighted_sum(np.ones(3), Grid((line_axis(1, 4),)))


@settings(max_examples=40, deadline=None)
@given(st.floats(-3, 3), st.floats(-3, 3))
def test_integration_is_linear(a, b):
    g = Grid((line_axis(6.0, 61, label="x"), circle_axis(8)))
    f = gaussian_bump(("x", "phi"), (1.0, 10.0))
    h = Field(("x", "phi"), lambda x, p: np.exp(-(x - 1) ** 2) * np.cos(p) ** 2)
    lhs = weighted_sum(a * sample(f, g).values + b * sample(h, g).values, g)
    rhs = a * integrate(sample(f, g)) + b * integrate(sample(h, g))
    assert abs(lhs - rhs) <= 1e-12 * (1 + abs(a) + abs(b))


def test_weighted_sum_bitwise_reproducible():
    g = Grid((line_axis(3, 33), line_axis(2, 21, "gauss_legendre", "t")))
    v = np.random.default_rng(0).normal(size=g.shape)
    assert weighted_sum(v, g) == weighted_sum(v.copy(), g)


def _test_matrix_fn(g):
    # C_c-like weight in matrix entries: exp(-beta |g|_F^2)
    return np.exp(-1.5 * np.sum(g * g, axis=(-2, -1)))


def test_haar_orders_agree():
    grid = Grid((circle_axis(16), line_axis(6.0, 161, label="n"), loga_axis(4.0, 161)))
    vals = {}
    for order in ("ANK", "KNA", "NAK", "KAN"):
        phi, n, t = grid.mesh()
        g = gr.iwasawa_compose_array(*np.broadcast_arrays(phi, t, n), order)
        from jacobi_harmonic.funcspace import GridFunction
        vals[order] = integrate_G(GridFunction(grid, _test_matrix_fn(g)), order)
    ref = vals["KNA"]
    for v in vals.values():
        assert abs(v - ref) <= 1e-6 * abs(ref)


def test_iwasawa_jacobian_signs():
    assert iwasawa_jacobian(1.0, "KAN") == pytest.approx(np.e**2)
    assert iwasawa_jacobian(1.0, "nak") == pytest.approx(np.e**-2)
    assert iwasawa_jacobian(1.0, "ANK") == 1.0
    with pytest.raises(ValueError):
        iwasawa_jacobian(0.0, "XYZ")


def test_integrate_G_needs_axes():
    from jacobi_harmonic.funcspace import GridFunction
    g = Grid((line_axis(1, 3, label="x"),))
    with pytest.raises(ValueError):
        integrate_G(GridFunction(g, np.ones(3)))


def test_kna_haar_left_invariant():
    grid = Grid((circle_axis(32), line_axis(7.0, 201, label="n"), loga_axis(4.5, 201)))
    phi, n, t = grid.flat_nodes()
    g = kna_matrix(phi, n, t)
    h = gr.iwasawa_compose_array(0.3, 0.2, -0.4, "KNA")
    base = _test_matrix_fn(g)
    moved = _test_matrix_fn(h @ g)
    w = grid.flat_weights()
    # residual is box truncation of the translated bump
    assert abs(np.sum(w * moved) - np.sum(w * base)) <= 1e-5 * np.sum(w * base)
    # chart coordinates roundtrip
    np.testing.assert_allclose(kna_matrix(*kna_coords(g)), g, atol=1e-12)
