"""Weighted mass, dispersion and convection operators of the implicit step."""

import math
from dataclasses import dataclass, field

import numpy as np

from .banded import BandedPeriodicMatrix
from .quadrature import gauss_legendre
from .spline import SplineFunction, SplineSpace, local_basis


def _weight_at(space, weight, rule, deriv=0):
    return np.asarray(weight(space.cell_points(rule.points), deriv), dtype=float)


def assemble_weighted_mass(space: SplineSpace, weight, order: int = 6) -> BandedPeriodicMatrix:
    """A[i, j] = int v_j phi v_i."""
    rule = gauss_legendre(order)
    b0 = local_basis(rule.points)
    phi = _weight_at(space, weight, rule)
    local = space.dx * np.einsum("kq,q,qa,qb->kab", phi, rule.weights, b0, b0)
    return BandedPeriodicMatrix.from_element_matrices(local, space.cell_dofs, space.ndof)


def assemble_dispersion(space: SplineSpace, weight, order: int = 6) -> BandedPeriodicMatrix:
    """D[i, j] = int (v_j)_x (phi v_i)_xx, cell by cell."""
    rule = gauss_legendre(order)
    h = space.dx
    b0, b1, b2 = (local_basis(rule.points, d) / h**d for d in range(3))
    p0, p1, p2 = (_weight_at(space, weight, rule, d) for d in range(3))
    # (phi v_i)_xx = phi'' v_i + 2 phi' v_i' + phi v_i''
    test = (
        p2[:, :, None] * b0[None]
        + 2.0 * p1[:, :, None] * b1[None]
        + p0[:, :, None] * b2[None]
    )
    local = h * np.einsum("q,kqa,qb->kab", rule.weights, test, b1)
    return BandedPeriodicMatrix.from_element_matrices(local, space.cell_dofs, space.ndof)


@dataclass(frozen=True, eq=False)
class SchemeOperators:
    space: SplineSpace
    weight: object
    A: BandedPeriodicMatrix
    D: BandedPeriodicMatrix
    order: int = 6
    _phi_q: np.ndarray = field(default=None, repr=False)

    def nonlinear(self, w: SplineFunction) -> np.ndarray:
        return assemble_nonlinear(self, w)


def build_operators(space: SplineSpace, weight, order: int = 6) -> SchemeOperators:
    rule = gauss_legendre(order)
    return SchemeOperators(
        space=space,
        weight=weight,
        A=assemble_weighted_mass(space, weight, order),
        D=assemble_dispersion(space, weight, order),
        order=order,
        _phi_q=_weight_at(space, weight, rule),
    )


def assemble_nonlinear(ops: SchemeOperators, w: SplineFunction) -> np.ndarray:
    """N_i(w) = int w w_x phi v_i."""
    space = ops.space
    if w.space != space:
        raise ValueError("function lives on a different space")
    rule = gauss_legendre(ops.order)
    phi = ops._phi_q if ops._phi_q is not None else _weight_at(space, ops.weight, rule)
    b0 = local_basis(rule.points)
    c = w.local_coeffs()
    w0 = c @ b0.T
    w1 = c @ local_basis(rule.points, 1).T / space.dx
    integrand = w0 * w1 * phi * rule.weights
    local = space.dx * integrand @ b0
    out = np.zeros(space.ndof)
    np.add.at(out, space.cell_dofs, local)
    return out


def identity_check(space: SplineSpace, weight, w: SplineFunction, order: int = 60,
                   subdivisions: int | None = None):
    """Both sides of int w_x (phi w)_xx = 3/2 int w_x^2 phi_x - 1/2 int w^2 phi_xxx.

    The left side is the quadratic form of the cell-wise dispersion integrand.
    On a periodic interval where phi is not periodic, integrating by parts
    leaves the seam term [phi w_x^2 / 2 + phi_xx w^2 / 2] (jumps of phi and
    phi_xx across the seam), which is added to the right side; it vanishes
    when w and w_x are zero at the seam.

    Each cell is split into ``subdivisions`` pieces with an ``order``-point
    rule on each; by default a weight with a mollifier of half-width h gets
    ceil(2 dx / h) pieces so that its bump is resolved.
    """
    if subdivisions is None:
        h = getattr(weight, "width", None)
        subdivisions = max(1, math.ceil(2.0 * space.dx / h)) if h else 1
    rule = gauss_legendre(order)
    pts = ((np.arange(subdivisions)[:, None] + rule.points) / subdivisions).ravel()
    wts = np.tile(rule.weights / subdivisions, subdivisions)
    x = space.cell_points(pts)
    u0, u1, u2 = (w.at_local(pts, d) for d in range(3))
    p0, p1, p2, p3 = (np.asarray(weight(x, d), dtype=float) for d in range(4))
    dx = space.dx
    lhs = dx * np.sum((u1 * (p2 * u0 + 2.0 * p1 * u1 + p0 * u2)) @ wts)
    rhs = dx * np.sum((1.5 * u1**2 * p1 - 0.5 * u0**2 * p3) @ wts)
    ends = np.array([space.x_left, space.x_right])
    jump0 = np.diff(weight(ends, 0))[0]
    jump2 = np.diff(weight(ends, 2))[0]
    rhs += 0.5 * jump0 * float(w(space.x_left, 1)) ** 2 + 0.5 * jump2 * float(w(space.x_left)) ** 2
    return float(lhs), float(rhs)
