import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kdv_hermite import SplineFunction, SplineSpace, basis_eval, eval_spline, project_l2
from kdv_hermite.analytic import eval_rough_l2
from kdv_hermite.quadrature import gauss_legendre

from conftest import localized_spline, random_spline


def test_space_layout():
    space = SplineSpace(-10.0, 10.0, 16)
    assert space.dx == pytest.approx(1.25)
    assert space.ndof == 32
    assert space.cell_dofs[-1].tolist() == [30, 31, 0, 1]


@pytest.mark.parametrize("kw", [dict(num_nodes=3), dict(x_right=-10.0), dict(periodic=False)])
def test_space_rejects_invalid(kw):
    args = dict(x_left=-10.0, x_right=10.0, num_nodes=8)
    args.update(kw)
    with pytest.raises((ValueError, NotImplementedError)):
        SplineSpace(**args)


def test_each_basis_function_lives_on_two_cells():
    space = SplineSpace(0.0, 8.0, 8)
    mids = space.nodes + 0.5 * space.dx
    for dof in range(space.ndof):
        vals = np.abs(basis_eval(space, dof, mids))
        assert np.count_nonzero(vals > 1e-14) == 2


def test_basis_values_at_nodes():
    space = SplineSpace(-10.0, 10.0, 16)
    j = 5
    xj = space.nodes[j]
    assert basis_eval(space, 2 * j, xj) == 1.0
    assert basis_eval(space, 2 * j + 1, xj) == 0.0
    assert basis_eval(space, 2 * j + 1, xj, 1) == pytest.approx(1.0 / space.dx, rel=1e-14)
    assert basis_eval(space, 2 * j, space.nodes[j + 1]) == 0.0


def test_basis_wraps_periodically():
    space = SplineSpace(-10.0, 10.0, 16)
    assert basis_eval(space, 0, 10.0) == 1.0
    assert basis_eval(space, 0, 10.0 - 0.5 * space.dx) == pytest.approx(0.5, abs=1e-14)


def test_basis_index_error():
    space = SplineSpace(0.0, 1.0, 8)
    with pytest.raises(IndexError):
        basis_eval(space, 16, 0.5)
    with pytest.raises(ValueError):
        basis_eval(space, 0, 0.5, deriv=3)


def test_zero_spline():
    space = SplineSpace(0.0, 1.0, 8)
    u = SplineFunction.zeros(space)
    assert np.all(eval_spline(u, np.linspace(0, 1, 50)) == 0.0)


def test_single_value_dof_midpoint():
    space = SplineSpace(-10.0, 10.0, 16)
    c = np.zeros(space.ndof)
    c[2 * 4] = 1.0
    u = SplineFunction(space, c)
    assert eval_spline(u, space.nodes[4] + 0.5 * space.dx) == pytest.approx(0.5, abs=1e-15)


def test_cubic_reproduction(rng):
    space = SplineSpace(-3.0, 5.0, 16)
    p = np.polynomial.Polynomial(rng.standard_normal(4))
    u = SplineFunction.interpolate(space, p, p.deriv())
    # every cell except the one closing the period
    for k in range(space.num_cells - 1):
        x = space.nodes[k] + space.dx * rng.uniform(0, 1, 10)
        for d in range(3):
            np.testing.assert_allclose(u(x, d), p.deriv(d)(x), rtol=1e-12, atol=1e-12 * np.abs(p.deriv(d)(x)).max())


def test_interpolant_of_periodic_function_midpoints():
    space = SplineSpace(0.0, 2 * np.pi, 64)
    u = SplineFunction.interpolate(space, np.sin, np.cos)
    mids = space.nodes + 0.5 * space.dx
    # cubic Hermite error bound h^4 / 384 * max|f''''|
    assert np.max(np.abs(u(mids) - np.sin(mids))) <= space.dx**4 / 384 * 1.0001


@settings(max_examples=30, deadline=None)
@given(st.integers(min_value=4, max_value=40), st.integers(min_value=0, max_value=2**31))
def test_c1_continuity(m, seed):
    rng = np.random.default_rng(seed)
    space = SplineSpace(-1.0, 2.0, m)
    u = random_spline(space, rng)
    for d in (0, 1):
        ends = u.at_local(np.array([0.0, 1.0]), d)
        left_limits = np.roll(ends[:, 1], 1)  # cell k-1 at s = 1
        scale = np.abs(ends).max()
        np.testing.assert_allclose(ends[:, 0], left_limits, atol=1e-12 * scale)


def test_projection_of_zero():
    space = SplineSpace(-5.0, 5.0, 32)
    u = project_l2(space, lambda x: np.zeros_like(x))
    assert np.all(u.coeffs == 0.0)


def test_projection_idempotent(rng):
    space = SplineSpace(-5.0, 5.0, 32)
    u = random_spline(space, rng)
    v = project_l2(space, u)
    np.testing.assert_allclose(v.coeffs, u.coeffs, atol=1e-10)


def test_projection_solves_mass_system(rng):
    space = SplineSpace(-5.0, 5.0, 24)
    f = lambda x: np.exp(np.sin(x))
    u = project_l2(space, f)
    # Galerkin orthogonality: (f - Pf, v_i) = 0 checked with an independent fine quadrature
    rule = gauss_legendre(30)
    for dof in rng.choice(space.ndof, 6, replace=False):
        x = space.cell_points(rule.points)
        r = space.dx * np.sum(((f(x) - u(x)) * basis_eval(space, dof, x)) @ rule.weights)
        assert abs(r) < 1e-12


def _l2(f, space, order=30):
    rule = gauss_legendre(order)
    x = space.cell_points(rule.points)
    return np.sqrt(space.dx * np.sum((f(x) ** 2) @ rule.weights))


def test_projection_contracts_l2(rng):
    space = SplineSpace(-5.0, 5.0, 20)
    for _ in range(20):
        a = rng.standard_normal(6)
        k = rng.integers(1, 12, 6) * 2 * np.pi / 10.0
        f = lambda x, a=a, k=k: np.sum(a[:, None, None] * np.sin(k[:, None, None] * x + a[0]), axis=0)
        assert project_l2(space, f).l2_norm() <= _l2(f, space) * (1 + 1e-10)


@pytest.mark.parametrize("m", [16, 64, 256])
def test_projection_of_rough_data(m):
    space = SplineSpace(-5.0, 5.0, m)
    u = project_l2(space, eval_rough_l2, breakpoints=(0.0, 1.0))
    norm = u.l2_norm()
    assert norm <= np.sqrt(3.0)
    assert norm > 0.85 * np.sqrt(3.0)


def test_projection_singular_load_is_accurate():
    # the load for the value DOF at x = 0 is int_0^dx x^(-1/3) f(x/dx) dx = dx^(2/3) * c
    # with c = int_0^1 y^(-1/3) (1 - 3y^2 + 2y^3) dy = 3/2 - 9/8 + 6/11
    space = SplineSpace(-5.0, 5.0, 40)
    u = project_l2(space, eval_rough_l2, breakpoints=(0.0, 1.0))
    load = space.mass_matrix.matvec(u.coeffs)
    j0 = 2 * 20
    expected = space.dx ** (2 / 3) * (1.5 - 9 / 8 + 6 / 11)
    assert load[j0] == pytest.approx(expected, rel=1e-9)


def test_inverse_inequality_constants_mesh_independent(rng):
    rule = gauss_legendre(6)
    c1, c2 = [], []
    for m in (16, 32, 64, 128):
        space = SplineSpace(-10.0, 10.0, m)
        best1 = best2 = 0.0
        for _ in range(100):
            z = localized_spline(space, rng)
            s = np.linspace(0, 1, 41)
            zx_inf = np.abs(z.at_local(s, 1)).max()
            zx_l2 = np.sqrt(space.dx * np.sum(z.at_local(rule.points, 1) ** 2 @ rule.weights))
            best1 = max(best1, space.dx**0.5 * zx_inf / zx_l2)
            best2 = max(best2, space.dx**1.5 * zx_inf / z.l2_norm())
        c1.append(best1)
        c2.append(best2)
    assert max(c1) / min(c1) < 2.0
    assert max(c2) / min(c2) < 2.0
