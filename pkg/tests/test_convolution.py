import numpy as np
import pytest

from jacobi_harmonic import convolution as cv
from jacobi_harmonic import funcspace as fs
from jacobi_harmonic.quadrature import Grid, circle_axis, line_axis, loga_axis


def r_grid(L=10.0, N=401):
    return Grid((line_axis(L, N, label="x"),))


def test_gaussian_convolution_closed_form():
    s1, s2 = 0.8, 1.3
    u = fs.sample(fs.gaussian_bump(("x",), s1), r_grid())
    v = fs.gaussian_bump(("x",), s2)
    h = np.linspace(-3, 3, 7)
    got = cv.convolve_abelian(u, v, "R", [h])
    s2tot = s1**2 + s2**2
    want = np.sqrt(2 * np.pi) * s1 * s2 / np.sqrt(s2tot) * np.exp(-h**2 / (2 * s2tot))
    np.testing.assert_allclose(got, want, atol=1e-12)


def test_r_convolution_commutes():
    f, g = fs.gaussian_bump(("x",), 0.7, 0.5), fs.gaussian_bump(("x",), 1.1, -0.3)
    h = np.linspace(-2, 2, 5)
    a = cv.convolve_abelian(fs.sample(f, r_grid()), g, "R", [h])
    b = cv.convolve_abelian(fs.sample(g, r_grid()), f, "R", [h])
    np.testing.assert_allclose(a, b, atol=1e-12)


def _mollifier(labels, eps):
    d = len(labels)
    return fs.gaussian_bump(labels, eps, amplitude=(2 * np.pi * eps * eps) ** (-d / 2))


def test_mollifier_on_heisenberg():
    eps = 0.05
    grid = Grid(tuple(line_axis(0.4, 41, "gauss_legendre", lab) for lab in ("z", "y", "x")))
    u = fs.gaussian_bump(fs.LABELS["N"], (1.0, 0.8, 1.2), (0.1, -0.2, 0.3))
    phi = fs.sample(_mollifier(fs.LABELS["N"], eps), grid)
    # (phi * u)(h) = int u(g^-1 h) phi(g) dg -> u(h)
    h = [np.array([0.2, -0.5]), np.array([0.1, 0.4]), np.array([0.0, -0.3])]
    got = cv.convolve_group(phi, u, "N", h)
    np.testing.assert_allclose(got, u(*h), atol=5e-3)


def test_zero_input():
    grid = Grid((line_axis(3.0, 21, label="n"), loga_axis(3.0, 21)))
    u = fs.sample(fs.zero_field(fs.LABELS["S"]), grid)
    out = cv.convolve_group(u, fs.gaussian_bump(fs.LABELS["S"], 1.0), "S", [np.zeros(3), np.ones(3)])
    assert np.all(out == 0)


def test_heisenberg_noncommutative():
    grid = Grid(tuple(line_axis(6.0, 31, label=lab) for lab in ("z", "y", "x")))
    f = fs.gaussian_bump(fs.LABELS["N"], 0.8, (0.0, 1.0, 0.0))
    g = fs.gaussian_bump(fs.LABELS["N"], 0.8, (0.0, 0.0, 1.0))
    h = [np.array([0.7]), np.array([0.5]), np.array([0.5])]
    fg = cv.convolve_group(fs.sample(f, grid), g, "N", h)
    gf = cv.convolve_group(fs.sample(g, grid), f, "N", h)
    assert abs(fg - gf)[0] > 1e-2 * abs(fg)[0]


def test_s_associativity():
    labels = fs.LABELS["S"]
    # narrow t widths: g^-1 h shrinks n-widths by e^{2 t_g}
    grid = Grid((line_axis(9.0, 181, label="n"), loga_axis(2.0, 41)))
    u = fs.gaussian_bump(labels, (0.8, 0.2), (0.1, 0.0))
    v = fs.gaussian_bump(labels, (0.6, 0.2), (-0.2, 0.1))
    w = fs.gaussian_bump(labels, (0.7, 0.25))
    h = [np.array([0.3, -0.2]), np.array([0.1, 0.2])]
    uv = cv.convolve_to_grid(fs.sample(u, grid), v, "S", grid)
    left = cv.convolve_group(uv, w, "S", h)
    vs = fs.sample(v, grid)
    vw = fs.Field(labels, lambda n, t: cv.convolve_group(vs, w, "S", [n, t]).reshape(np.shape(n)))
    right = cv.convolve_group(fs.sample(u, grid), vw, "S", h)
    np.testing.assert_allclose(left, right, rtol=1e-6)


def test_budget_error():
    grid = Grid(tuple(line_axis(1.0, 10, label=lab) for lab in ("z", "y", "x")))
    u = fs.sample(fs.gaussian_bump(fs.LABELS["N"], 1.0), grid)
    with pytest.raises(cv.BudgetError, match="exceeds budget"):
        cv.convolve_group(u, u, "N", [np.zeros(11)] * 3, budget=10_000)


def test_measure_and_label_checks():
    bad = Grid((line_axis(3.0, 9, label="phi"), line_axis(3.0, 9, label="n"), loga_axis(1.0, 9)))
    u = fs.sample(fs.gaussian_bump(fs.LABELS["G"], 1.0), bad)
    with pytest.raises(ValueError, match="normalised circle"):
        cv.convolve_group(u, u, "G", [np.zeros(1)] * 3)
    r = fs.sample(fs.gaussian_bump(("x",), 1.0), r_grid(N=11))
    with pytest.raises(ValueError, match="do not match"):
        cv.convolve_group(r, r, "S", [np.zeros(1)] * 2)
    with pytest.raises(ValueError):
        cv.convolve_group(r, r, "R", [np.zeros(1)])
    with pytest.raises(ValueError):
        cv.convolve_abelian(r, r, "N", [np.zeros(1)])
    with pytest.raises(ValueError, match="coordinate arrays"):
        cv.convolve_abelian(r, r, "R", [np.zeros(1)] * 2)


def test_convolve_to_grid_dimension_limit():
    grid = Grid(tuple(line_axis(1.0, 3, label=lab) for lab in fs.LABELS["M"]))
    u = fs.sample(fs.gaussian_bump(fs.LABELS["M"], 1.0), grid)
    with pytest.raises(ValueError, match="three dimensions"):
        cv.convolve_to_grid(u, u, "M", grid)


def test_lifted_G_of_constant():
    grid = Grid((circle_axis(8), line_axis(5.0, 41, label="n"), loga_axis(4.0, 41)))
    psi = fs.sample(fs.gaussian_bump(fs.LABELS["G"], (10.0, 1.0, 0.8)), grid)
    one = fs.upsilon_lift(fs.Field(fs.LABELS["G"], lambda phi, n, t: np.ones_like(n)))
    out = cv.convolve_lifted_G(one, psi, [np.array([0.3]), np.array([0.1]), np.array([0.2]), np.array([1.0])])
    from jacobi_harmonic.quadrature import integrate
    assert out[0] == pytest.approx(integrate(psi), rel=1e-13)


def _l1(F):
    from jacobi_harmonic.quadrature import weighted_sum
    return weighted_sum(np.abs(F.values), F.grid).real


def test_young_bound_on_S():
    labels = fs.LABELS["S"]
    grid = Grid((line_axis(9.0, 121, label="n"), loga_axis(2.0, 41)))
    # oscillating factors make the bound strict
    u = fs.Field(labels, lambda n, t: np.exp(-n * n / 1.28 - t * t / 0.08 + 2j * n))
    v = fs.Field(labels, lambda n, t: np.exp(-(n - 0.3) ** 2 / 0.72 - t * t / 0.08 - 1j * n))
    U, V = fs.sample(u, grid), fs.sample(v, grid)
    ch_w = np.exp(-2 * grid.mesh()[1])
    l1 = lambda F: np.sum(np.abs(F.values) * ch_w * np.multiply.outer(*(a.weights for a in grid.axes)))
    W = cv.convolve_to_grid(U, v, "S", grid)
    assert l1(W) <= l1(U) * l1(V) * (1 + 1e-6)
    assert l1(W) < 0.99 * l1(U) * l1(V)


def test_mollifier_error_shrinks_monotonically():
    f = fs.Field(("x",), lambda x: np.exp(-x * x / 2) * np.cos(1.5 * x))
    grid = r_grid(1.0, 1601)
    h = [np.linspace(-1.5, 1.5, 13)]
    errs = []
    for eps in (0.2, 0.1, 0.05, 0.025):
        phi = fs.sample(_mollifier(("x",), eps), Grid((line_axis(8 * eps, 801, label="x"),)))
        errs.append(np.max(np.abs(cv.convolve_abelian(phi, f, "R", h) - f(*h))))
    assert all(b < a for a, b in zip(errs, errs[1:]))


@pytest.mark.parametrize("measure,should_hold", [("left_haar", True), ("right_haar", False)])
def test_s_haar_left_invariance(measure, should_hold):
    from jacobi_harmonic.charts import SChart
    ch = SChart(measure)
    grid = Grid((line_axis(24.0, 961, label="n"), loga_axis(5.0, 201)))
    n, t = grid.flat_nodes()
    w = grid.flat_weights() * ch.density((n, t))
    f = lambda n_, t_: np.exp(-n_ * n_ / 2 - t_ * t_ / 0.5)
    base = np.sum(w * f(n, t))
    rng = np.random.default_rng(0)
    errs = []
    for _ in range(20):
        n0, t0 = rng.uniform(-1, 1), rng.uniform(-0.5, 0.5)
        moved = np.sum(w * f(*ch.mul((n0, t0), (n, t))))
        errs.append(abs(moved - base) / base)
    if should_hold:
        assert max(errs) <= 1e-6
    else:
        assert max(errs) > 1e-2
