import numpy as np
import pytest
import sympy as sp

from kdv_hermite import SplineSpace, gauss_legendre, integrate_cells
from kdv_hermite.spline import ref_f, ref_g


def _sympy_square_integral(which):
    y = sp.symbols("y")
    right = 1 - 3 * y**2 + 2 * y**3 if which == "f" else y * (1 - y) ** 2
    # both shape functions are even/odd mirror images, so the square is even
    return float(2 * sp.integrate(right**2, (y, 0, 1)))


@pytest.mark.parametrize("order", [1, 2, 3, 6, 10, 20, 40])
def test_rule_exact_for_monomials(order):
    rule = gauss_legendre(order)
    assert rule.weights.sum() == pytest.approx(1.0, abs=1e-14)
    assert np.all(rule.weights > 0)
    for k in range(2 * order):
        assert np.dot(rule.weights, rule.points**k) == pytest.approx(1 / (k + 1), abs=1e-13)


def test_invalid_order():
    with pytest.raises(ValueError):
        gauss_legendre(0)


def test_constant_integrand():
    space = SplineSpace(-10.0, 10.0, 37)
    assert integrate_cells(space, lambda k, s: 1.0) == pytest.approx(20.0, abs=1e-12)


@pytest.mark.parametrize("which,ref,expected", [("f", ref_f, 26 / 35), ("g", ref_g, 2 / 105)])
def test_shape_function_squares(which, ref, expected):
    assert _sympy_square_integral(which) == pytest.approx(expected, rel=1e-15)
    # unit cells; node 2 sits at y = 0 and its support is cells 1 and 2
    space = SplineSpace(0.0, 8.0, 8)

    def integrand(k, s):
        y = (k + s) - 2.0
        return ref(y) ** 2

    assert integrate_cells(space, integrand) == pytest.approx(expected, abs=1e-13)
