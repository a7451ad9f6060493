"""Periodic C1 cubic Hermite spline space on a uniform mesh.

Node j carries two unknowns: the value DOF ``2j`` with shape function
``f((x - x_j)/dx)`` and the slope DOF ``2j+1`` with ``g((x - x_j)/dx)``, where

    f(y) = 1 + y^2 (2|y| - 3),    g(y) = y (1 - |y|)^2,    |y| <= 1.

The slope coefficient is therefore ``dx * u'(x_j)``.
"""

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .banded import BandedPeriodicMatrix
from .quadrature import gauss_legendre


def ref_f(y, deriv=0):
    y = np.asarray(y, dtype=float)
    a = np.abs(y)
    sgn = np.sign(y)
    if deriv == 0:
        out = 1.0 + y**2 * (2.0 * a - 3.0)
    elif deriv == 1:
        out = 6.0 * y * a - 6.0 * y
    elif deriv == 2:
        out = 12.0 * a - 6.0
    elif deriv == 3:
        out = 12.0 * sgn
    else:
        raise ValueError(f"unsupported derivative order {deriv}")
    return np.where(a <= 1.0, out, 0.0)


def ref_g(y, deriv=0):
    y = np.asarray(y, dtype=float)
    a = np.abs(y)
    sgn = np.where(y > 0, 1.0, -1.0)
    # y (1 - |y|)^2 = y - 2 y|y| + y^3
    if deriv == 0:
        out = y * (1.0 - a) ** 2
    elif deriv == 1:
        out = 1.0 - 4.0 * a + 3.0 * y**2
    elif deriv == 2:
        out = -4.0 * sgn + 6.0 * y
    elif deriv == 3:
        out = np.full_like(y, 6.0)
    else:
        raise ValueError(f"unsupported derivative order {deriv}")
    return np.where(a <= 1.0, out, 0.0)


def local_basis(s, deriv=0):
    """Shape functions on one cell in local coordinate s in [0, 1].

    Columns: left value, left slope, right value, right slope; derivatives
    are with respect to s (divide by dx**deriv for x-derivatives).
    """
    s = np.asarray(s, dtype=float)
    if deriv == 0:
        cols = (1 - 3 * s**2 + 2 * s**3, s * (1 - s) ** 2, 3 * s**2 - 2 * s**3, s**2 * (s - 1))
    elif deriv == 1:
        cols = (6 * s**2 - 6 * s, 1 - 4 * s + 3 * s**2, 6 * s - 6 * s**2, 3 * s**2 - 2 * s)
    elif deriv == 2:
        cols = (12 * s - 6, 6 * s - 4, 6 - 12 * s, 6 * s - 2)
    elif deriv == 3:
        one = np.ones_like(s)
        cols = (12 * one, 6 * one, -12 * one, 6 * one)
    else:
        raise ValueError(f"unsupported derivative order {deriv}")
    return np.stack(cols, axis=-1)


@dataclass(frozen=True)
class SplineSpace:
    x_left: float
    x_right: float
    num_nodes: int
    periodic: bool = True

    def __post_init__(self):
        if not self.periodic:
            raise NotImplementedError("only periodic spline spaces are supported")
        if self.num_nodes < 4:
            raise ValueError("need at least 4 mesh nodes")
        if not self.x_right > self.x_left:
            raise ValueError("empty domain")

    @property
    def dx(self) -> float:
        return (self.x_right - self.x_left) / self.num_nodes

    @property
    def length(self) -> float:
        return self.x_right - self.x_left

    @property
    def num_cells(self) -> int:
        return self.num_nodes

    @property
    def ndof(self) -> int:
        return 2 * self.num_nodes

    @cached_property
    def nodes(self) -> np.ndarray:
        return self.x_left + self.dx * np.arange(self.num_nodes)

    @cached_property
    def cell_dofs(self) -> np.ndarray:
        k = np.arange(self.num_cells)
        return np.stack([2 * k, 2 * k + 1, (2 * k + 2) % self.ndof, (2 * k + 3) % self.ndof], axis=1)

    def cell_points(self, s) -> np.ndarray:
        """Physical coordinates of local points s, shape (num_cells, len(s))."""
        return self.x_left + self.dx * (np.arange(self.num_cells)[:, None] + np.asarray(s)[None, :])

    def locate(self, x):
        """Cell index and local coordinate for x, wrapping periodically."""
        x = np.asarray(x, dtype=float)
        t = (x - self.x_left) / self.dx
        k = np.floor(t)
        s = t - k
        k = k.astype(int)
        # x_right (and its periodic images) belong to the last cell with s = 1
        at_seam = (s == 0.0) & (k % self.num_cells == 0) & (x != self.x_left)
        k = np.where(at_seam, k - 1, k)
        s = np.where(at_seam, 1.0, s)
        return k % self.num_cells, s

    @cached_property
    def mass_matrix(self) -> BandedPeriodicMatrix:
        rule = gauss_legendre(4)
        b0 = local_basis(rule.points)
        local = self.dx * np.einsum("q,qa,qb->ab", rule.weights, b0, b0)
        local = np.broadcast_to(local, (self.num_cells, 4, 4))
        return BandedPeriodicMatrix.from_element_matrices(local, self.cell_dofs, self.ndof)

    @cached_property
    def mass_factor(self):
        return self.mass_matrix.factorize()


@dataclass(frozen=True, eq=False)
class SplineFunction:
    space: SplineSpace
    coeffs: np.ndarray = field(repr=False)

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=float)
        if c.shape != (self.space.ndof,):
            raise ValueError(f"expected {self.space.ndof} coefficients, got shape {c.shape}")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def zeros(cls, space):
        return cls(space, np.zeros(space.ndof))

    @classmethod
    def interpolate(cls, space, func, dfunc):
        """Hermite interpolant from a function and its derivative."""
        x = space.nodes
        c = np.empty(space.ndof)
        c[0::2] = func(x)
        c[1::2] = space.dx * dfunc(x)
        return cls(space, c)

    def __call__(self, x, deriv=0):
        return eval_spline(self, x, deriv)

    def local_coeffs(self) -> np.ndarray:
        return self.coeffs[self.space.cell_dofs]

    def at_local(self, s, deriv=0) -> np.ndarray:
        """Values (or x-derivatives) at local points s in every cell, shape (cells, len(s))."""
        b = local_basis(np.asarray(s, dtype=float), deriv)
        return self.local_coeffs() @ b.T / self.space.dx**deriv

    def l2_norm(self) -> float:
        return float(np.sqrt(max(self.coeffs @ self.space.mass_matrix.matvec(self.coeffs), 0.0)))

    def __add__(self, other):
        return SplineFunction(self.space, self.coeffs + other.coeffs)

    def __sub__(self, other):
        return SplineFunction(self.space, self.coeffs - other.coeffs)

    def __mul__(self, alpha):
        return SplineFunction(self.space, alpha * self.coeffs)

    __rmul__ = __mul__


def _check_deriv(deriv):
    if deriv not in (0, 1, 2):
        raise ValueError(f"derivative order must be 0, 1 or 2, got {deriv}")


def basis_eval(space: SplineSpace, dof_index: int, x, deriv: int = 0):
    _check_deriv(deriv)
    if not 0 <= dof_index < space.ndof:
        raise IndexError(f"dof index {dof_index} out of range for {space.ndof} unknowns")
    node = dof_index // 2
    # nearest periodic image of the node
    y = (np.asarray(x, dtype=float) - space.nodes[node]) / space.dx
    m = space.num_nodes
    y = (y + m / 2) % m - m / 2
    ref = ref_f if dof_index % 2 == 0 else ref_g
    out = ref(y, deriv) / space.dx**deriv
    return float(out) if np.ndim(out) == 0 else out


def eval_spline(u: SplineFunction, x, deriv: int = 0):
    _check_deriv(deriv)
    space = u.space
    k, s = space.locate(x)
    c = u.coeffs[space.cell_dofs[k]]
    out = np.sum(c * local_basis(s, deriv), axis=-1) / space.dx**deriv
    return float(out) if np.ndim(out) == 0 else out


def project_l2(
    space: SplineSpace,
    u0,
    breakpoints=(),
    order: int = 20,
    blowup: float = 1e6,
    max_depth: int = 12,
) -> SplineFunction:
    """L2-orthogonal projection of a vectorized callable onto ``space``.

    Load integrals use ``order``-point Gauss per cell. Cells containing a
    point in ``breakpoints`` (jumps or integrable singularities, given in
    physical coordinates) are split there, and each adjacent piece is
    integrated after the substitution ``s = p + (q - p) tau^3`` clustered at
    the breakpoint ``p``, which turns ``|x - p|^(-alpha)`` singularities into
    smooth integrands. Any other piece where ``|u0|`` exceeds ``blowup`` at a
    quadrature point is bisected, up to ``max_depth`` levels.
    """
    rule = gauss_legendre(order)
    dx = space.dx
    xq = space.cell_points(rule.points)
    vals = np.asarray(u0(xq), dtype=float)
    b0 = local_basis(rule.points)
    load = dx * (vals * rule.weights) @ b0

    special = {}
    for bp in breakpoints:
        k, s = space.locate(bp)
        special.setdefault(int(k), set()).add(float(s))
        # a breakpoint on a node also affects the neighbouring cell
        if s == 0.0:
            special.setdefault(int((k - 1) % space.num_cells), set()).add(1.0)
    bad = np.any(~np.isfinite(vals) | (np.abs(vals) > blowup), axis=1)
    for k in np.flatnonzero(bad):
        special.setdefault(int(k), set())

    def piece_load(k, a, b, depth):
        s = a + (b - a) * rule.points
        x = space.x_left + dx * (k + s)
        v = np.asarray(u0(x), dtype=float)
        if depth < max_depth and np.any(~np.isfinite(v) | (np.abs(v) > blowup)):
            m = 0.5 * (a + b)
            return piece_load(k, a, m, depth + 1) + piece_load(k, m, b, depth + 1)
        v = np.where(np.isfinite(v), v, 0.0)
        return dx * (b - a) * (v * rule.weights) @ local_basis(s)

    def cubic_piece(k, p, q):
        tau = rule.points
        s = p + (q - p) * tau**3
        x = space.x_left + dx * (k + s)
        v = np.asarray(u0(x), dtype=float)
        v = np.where(np.isfinite(v), v, 0.0)
        jac = 3.0 * abs(q - p) * tau**2
        return dx * (v * jac * rule.weights) @ local_basis(s)

    for k, pts in special.items():
        cuts = sorted({0.0, 1.0} | pts)
        total = np.zeros(4)
        for a, b in zip(cuts[:-1], cuts[1:]):
            if b <= a:
                continue
            if a in pts or b in pts:
                p, q = (a, b) if a in pts else (b, a)
                # the substitution handles the breakpoint end; split so only one end is special
                if a in pts and b in pts:
                    m = 0.5 * (a + b)
                    total += cubic_piece(k, a, m) + cubic_piece(k, b, m)
                else:
                    total += cubic_piece(k, p, q)
            else:
                total += piece_load(k, a, b, 0)
        load[k] = total

    rhs = np.zeros(space.ndof)
    np.add.at(rhs, space.cell_dofs, load)
    coeffs = space.mass_factor.solve(rhs)
    return SplineFunction(space, coeffs)
