import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from jacobi_harmonic import funcspace as fs
from jacobi_harmonic import groups as gr
from jacobi_harmonic.quadrature import Grid, circle_axis, line_axis

coord = st.floats(-2, 2, allow_nan=False)


def n_z():
    return fs.Field(fs.LABELS["N"], lambda z, y, x: z, "coordinate_z")


def test_lambda_inv_example():
    assert fs.lambda_inv(n_z())(1.0, 1.0, 2.0).real == pytest.approx(3.0)


def test_chi_inv_example():
    f = fs.Field(fs.LABELS["S"], lambda n, t: n + 10 * t)
    t = np.log(2.0)
    assert fs.chi_inv(f)(1.0, t) == pytest.approx(f(4.0, t))


def test_xi_lift_example():
    psi = fs.Field(fs.LABELS["M"], lambda z, y, x, sn, st: z + 10 * y + 100 * x + 1000 * sn + 1e4 * st)
    s = (0.3, -0.2)
    assert fs.xi_lift(psi)(0.0, 1.0, 1.0, 0.0, *s) == pytest.approx(psi(1.0, 1.0, 1.0, *s))


def test_tau_lift_variants():
    f = fs.Field(fs.LABELS["N"], lambda z, y, x: z * 100 + y * 10 + x)
    assert fs.tau_lift(f)(1.0, 2.0, 3.0, 4.0) == pytest.approx(f(1 + 3 * 2, 2, 7))
    g = fs.Field(fs.LABELS["S"], lambda n, t: n + 1j * t)
    assert fs.tau_lift_positive(g, 2.0, 3.0, 1.0) == pytest.approx(g(4.0, np.log(6.0)))
    with pytest.raises(ValueError):
        fs.tau_lift_positive(g, -1.0, 1.0, 0.0)
    with pytest.raises(ValueError):
        fs.tau_lift(f, "bogus")


@settings(max_examples=50, deadline=None)
@given(coord, coord, coord)
def test_lambda_roundtrips(z, y, x):
    f = fs.gaussian_bump(fs.LABELS["N"], (1.0, 0.7, 1.3), (0.2, -0.1, 0.4))
    g = fs.gaussian_bump(fs.LABELS["FRAK"], (0.8, 1.1, 0.9))
    assert abs(fs.lambda_map(fs.lambda_inv(f))(z, y, x) - f(z, y, x)) <= 1e-13
    assert abs(fs.lambda_inv(fs.lambda_map(g))(z, y, x) - g(z, y, x)) <= 1e-13


@settings(max_examples=50, deadline=None)
@given(coord, coord)
def test_chi_roundtrips(n, t):
    f = fs.gaussian_bump(fs.LABELS["S"], (1.0, 0.5), (0.3, 0.0))
    assert abs(fs.chi_map(fs.chi_inv(f))(n, t) - f(n, t)) <= 1e-13
    assert abs(fs.chi_inv(fs.chi_map(f))(n, t) - f(n, t)) <= 1e-13


@pytest.mark.parametrize("tag", ["N", "S", "G", "J", "M"])
def test_involution_twice_is_identity(tag):
    labels = fs.LABELS[tag]
    angular = [lab.startswith("phi") for lab in labels]

    def fn(*p):
        out = 1.0
        for k, (c, ang) in enumerate(zip(p, angular)):
            out = out * (np.exp(1j * (k + 1) * c) if ang else np.exp(1j * (k + 1) * c - c * c))
        return out

    f = fs.Field(labels, fn)
    ff = fs.involution(fs.involution(f, tag), tag)
    rng = np.random.default_rng(1)
    pts = [rng.uniform(-1, 1, 20) for _ in labels]
    scale = np.max(np.abs(f(*pts)))
    assert np.max(np.abs(ff(*pts) - f(*pts))) <= 1e-12 * max(scale, 1e-300) + 1e-14


def test_involution_on_heisenberg():
    f = fs.Field(fs.LABELS["N"], lambda z, y, x: z + 2j * y)
    assert fs.involution(f, "N")(1.0, 2.0, 3.0) == pytest.approx(np.conj(f(-1.0, -2.0, -3.0)))


def test_upsilon_restricts_back():
    f = fs.gaussian_bump(fs.LABELS["G"], (5.0, 1.0, 0.7), (0.0, 0.3, -0.1))
    back = fs.restrict_k_identity(fs.upsilon_lift(f))
    pts = [np.array([0.2, 1.0, 3.0]), np.array([0.1, -0.5, 0.9]), np.array([0.0, 0.3, -0.4])]
    np.testing.assert_allclose(back(*pts), f(*pts), atol=1e-13)


def test_upsilon_right_rotation():
    f = fs.Field(fs.LABELS["G"], lambda phi, n, t: np.exp(1j * phi) * np.exp(-n * n - t * t))
    lifted = fs.upsilon_lift(f)
    # KNA: right multiplication by k(k1) on g = k(phi) only shifts phi
    assert lifted(0.3, 0.0, 0.0, 0.4) == pytest.approx(f(0.7, 0.0, 0.0))


def test_gamma_shift_zero_identity():
    psi = fs.gaussian_bump(fs.LABELS["J"], 1.0)
    pts = [np.array([0.1])] * 3 + [np.array([1.0]), np.array([0.2]), np.array([-0.3])]
    np.testing.assert_allclose(fs.gamma_shift(psi, 0.0)(*pts), psi(*pts), atol=1e-14)


def test_tilde_lift_identity_slot():
    f = fs.gaussian_bump(fs.LABELS["J"], (1.0, 1.0, 1.0, 10.0, 1.0, 1.0))
    ft = fs.tilde_lift(f)
    x = (0.3, -0.2, 0.5)
    # M1 = I: f~(X, I, M2) = f(X, M2)
    assert ft(*x, 0.0, 0.0, 0.0, 0.4, 0.1, -0.2) == pytest.approx(f(*x, 0.4, 0.1, -0.2))


def test_trig_poly_and_degree():
    f = fs.trig_poly({0: 1.0, 3: 2j})
    assert fs.trig_degree(f) == 3
    assert f(0.0) == pytest.approx(1 + 2j)
    assert fs.trig_degree(fs.random_trig_poly(5, np.random.default_rng(0))) == 5


def test_gaussian_bump_validation():
    with pytest.raises(ValueError):
        fs.gaussian_bump(("x",), -1.0)
    g = fs.shifted_gaussian(("x",), 1.0)
    assert g(1.0) == pytest.approx(1.0) and g.family == "shifted_gaussian"


def test_separable_function_matches_product():
    labels = ("x", "y")
    f = fs.separable_product(labels, {"x": fs.gaussian_bump(("x",), 1.0), "y": fs.trig_poly({1: 1.0}, "y")}, 2.0)
    f = f + fs.separable_product(labels, {"y": fs.gaussian_bump(("y",), 0.5)})
    assert len(f.terms) == 2
    x, y = 0.3, -0.7
    assert f(x, y) == pytest.approx(2 * np.exp(-x * x / 2) * np.exp(1j * y) + np.exp(-y * y / 0.5))
    assert f.profile(1, "x")(5.0) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        fs.separable_product(labels, {"z": fs.gaussian_bump(("z",), 1.0)})


def test_field_arity_and_sum():
    f = fs.gaussian_bump(("x", "y"), 1.0)
    with pytest.raises(ValueError):
        f(1.0)
    with pytest.raises(ValueError):
        f + fs.zero_field(("x",))
    assert (f + f.scale(2.0))(0.0, 0.0) == pytest.approx(3.0)


def _grid():
    return Grid((circle_axis(8), line_axis(2.0, 5, label="n")))


def test_grid_function_immutable_and_checked():
    F = fs.sample(fs.gaussian_bump(("phi", "n"), 1.0), _grid())
    with pytest.raises(ValueError):
        F.values[0, 0] = 1.0
    with pytest.raises(ValueError):
        fs.GridFunction(_grid(), np.zeros((3, 3)))
    with pytest.raises(ValueError):
        fs.sample(fs.gaussian_bump(("n", "phi"), 1.0), _grid())


def test_grid_function_json_roundtrip():
    F = fs.sample(fs.Field(("phi", "n"), lambda p, n: np.exp(1j * p) * n), _grid())
    text = json.dumps(F.to_json())
    back = fs.GridFunction.from_json(json.loads(text))
    assert np.array_equal(back.values, F.values)
    assert back.grid.labels == F.grid.labels
    assert back.evaluator is None


def test_missing_evaluator():
    F = fs.GridFunction(_grid(), np.ones((8, 5)))
    with pytest.raises(fs.MissingEvaluatorError):
        F(0.0, 0.0)
    with pytest.raises(fs.MissingEvaluatorError):
        fs.involution(F, "S")
    with pytest.raises(TypeError):
        fs.involution(np.ones(3), "S")
