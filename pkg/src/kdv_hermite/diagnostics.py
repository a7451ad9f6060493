"""Norms, relative errors, convergence rates and the local smoothing functional."""

import math
from dataclasses import dataclass

import numpy as np

from .banded import BandedPeriodicMatrix
from .quadrature import gauss_legendre
from .spline import SplineFunction, SplineSpace, local_basis


class UndefinedMetricError(ValueError):
    pass


@dataclass(frozen=True)
class ErrorReport:
    M_nodes: int
    E_percent: float
    rate_vs_previous: float | None
    l2_exact: float
    l2_numeric: float

    def __post_init__(self):
        if self.E_percent < 0:
            raise ValueError("E_percent must be non-negative")


def _window_quadrature(space: SplineSpace, a: float, b: float, order: int):
    """Cells, local points and scaled weights covering [a, b] (a subset of the domain)."""
    tol = 1e-12 * space.length
    if a < space.x_left - tol or b > space.x_right + tol or not b > a:
        raise ValueError(f"window [{a}, {b}] not inside [{space.x_left}, {space.x_right}]")
    rule = gauss_legendre(order)
    k = np.arange(space.num_cells)
    lo = np.clip((a - space.x_left) / space.dx - k, 0.0, 1.0)
    hi = np.clip((b - space.x_left) / space.dx - k, 0.0, 1.0)
    keep = hi > lo
    k, lo, hi = k[keep], lo[keep], hi[keep]
    s = lo[:, None] + (hi - lo)[:, None] * rule.points[None, :]
    w = space.dx * (hi - lo)[:, None] * rule.weights[None, :]
    return k, s, w


def _values(u: SplineFunction, k, s, deriv=0):
    c = u.coeffs[u.space.cell_dofs[k]]
    return np.einsum("ka,kqa->kq", c, local_basis(s, deriv)) / u.space.dx**deriv


def l2_norm(u: SplineFunction) -> float:
    return u.l2_norm()


def weighted_norm(u: SplineFunction, weight, order: int = 6) -> float:
    """sqrt(int u^2 phi) by cell quadrature."""
    space = u.space
    k, s, w = _window_quadrature(space, space.x_left, space.x_right, order)
    x = space.x_left + space.dx * (k[:, None] + s)
    return math.sqrt(max(float(np.sum(w * _values(u, k, s) ** 2 * weight(x))), 0.0))


def error_percent(u_exact, u_h: SplineFunction, domain=None, order: int = 10) -> float:
    """100 ||u - u_h|| / ||u|| over ``domain`` (default: the whole periodic interval)."""
    space = u_h.space
    a, b = domain if domain is not None else (space.x_left, space.x_right)
    k, s, w = _window_quadrature(space, a, b, order)
    x = space.x_left + space.dx * (k[:, None] + s)
    ue = np.asarray(u_exact(x), dtype=float)
    ref = math.sqrt(float(np.sum(w * ue**2)))
    if ref == 0.0:
        raise UndefinedMetricError("exact solution has zero L2 norm")
    err = math.sqrt(float(np.sum(w * (ue - _values(u_h, k, s)) ** 2)))
    return 100.0 * err / ref


def l2_difference(u: SplineFunction, v: SplineFunction, order: int = 10) -> float:
    """||u - v|| for splines on possibly different meshes of the same interval.

    Integrates on the finer mesh's cells; when that mesh refines the other,
    both are polynomial per cell and the quadrature is exact.
    """
    if (u.space.x_left, u.space.x_right) != (v.space.x_left, v.space.x_right):
        raise ValueError("splines live on different intervals")
    fine = u.space if u.space.num_cells >= v.space.num_cells else v.space
    k, s, w = _window_quadrature(fine, fine.x_left, fine.x_right, order)
    x = fine.x_left + fine.dx * (k[:, None] + s)
    return math.sqrt(float(np.sum(w * (u(x) - v(x)) ** 2)))


def convergence_rate(E_coarse: float, E_fine: float, refinement_factor: float = 2.0) -> float:
    if not (E_coarse > 0 and E_fine > 0):
        raise UndefinedMetricError("convergence rate needs positive errors")
    return math.log(E_coarse / E_fine) / math.log(refinement_factor)


def h1_local_seminorm(u: SplineFunction, R_window: float, order: int = 4) -> float:
    """int_{-R}^{R} u_x^2 (squared seminorm), partial end cells by sub-cell quadrature."""
    k, s, w = _window_quadrature(u.space, -R_window, R_window, order)
    return float(np.sum(w * _values(u, k, s, 1) ** 2))


def window_stiffness(space: SplineSpace, R_window: float) -> BandedPeriodicMatrix:
    """K[i, j] = int_{-R}^{R} v_i' v_j', so that c^T K c = h1_local_seminorm."""
    k, s, w = _window_quadrature(space, -R_window, R_window, 3)
    b1 = local_basis(s, 1) / space.dx
    local = np.zeros((space.num_cells, 4, 4))
    local[k] = np.einsum("kq,kqa,kqb->kab", w, b1, b1)
    return BandedPeriodicMatrix.from_element_matrices(local, space.cell_dofs, space.ndof)


def kato_functional(history) -> float:
    """Accumulated sum over steps of dt * ||u_x^{n+1}||^2_{L2(-R, R)}."""
    return float(sum(r.dt * r.h1_local for r in history[1:]))


def error_table(M_list, errors, l2_exact=None, l2_numeric=None):
    """ErrorReports with rates chained over adjacent rows (None after a failed row)."""
    rows = []
    prev = None
    for i, (m, e) in enumerate(zip(M_list, errors)):
        rate = None
        if prev is not None and e is not None and prev[1] is not None and prev[1] > 0 and e > 0:
            rate = convergence_rate(prev[1], e, m / prev[0])
        if e is not None:
            rows.append(ErrorReport(
                M_nodes=m, E_percent=e, rate_vs_previous=rate,
                l2_exact=l2_exact[i] if l2_exact else math.nan,
                l2_numeric=l2_numeric[i] if l2_numeric else math.nan,
            ))
        prev = (m, e)
    return rows
