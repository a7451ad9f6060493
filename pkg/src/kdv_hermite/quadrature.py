"""Gauss-Legendre rules on the reference cell [0, 1] and cell-wise integration."""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np


@dataclass(frozen=True)
class QuadratureRule:
    """Gauss-Legendre rule mapped to [0, 1]; weights sum to one."""

    points: np.ndarray
    weights: np.ndarray
    order: int

    def __post_init__(self):
        if self.order < 1:
            raise ValueError("quadrature order must be >= 1")
        if np.any(self.weights <= 0):
            raise ValueError("quadrature weights must be positive")
        # exact for monomials up to degree 2*order-1 on [0, 1]
        for k in range(2 * self.order):
            approx = np.dot(self.weights, self.points**k)
            if abs(approx - 1.0 / (k + 1)) > 1e-13:
                raise ArithmeticError(f"rule of order {self.order} fails on x^{k}")


@lru_cache(maxsize=None)
def gauss_legendre(order: int = 6) -> QuadratureRule:
    if order < 1:
        raise ValueError("quadrature order must be >= 1")
    x, w = np.polynomial.legendre.leggauss(order)
    pts = 0.5 * (x + 1.0)
    wts = 0.5 * w
    pts.setflags(write=False)
    wts.setflags(write=False)
    return QuadratureRule(points=pts, weights=wts, order=order)


def integrate_cells(space, integrand, rule: QuadratureRule | None = None) -> float:
    """Sum over cells of dx * sum_q w_q * integrand(cell, s_q).

    ``integrand`` is called once with broadcastable arrays ``cells`` of shape
    (ncells, 1) and ``s`` of shape (1, nq) and must return an (ncells, nq)
    array (scalars are broadcast).
    """
    rule = rule or gauss_legendre(6)
    cells = np.arange(space.num_cells)[:, None]
    s = rule.points[None, :]
    vals = np.broadcast_to(integrand(cells, s), (space.num_cells, rule.order))
    return float(space.dx * np.sum(vals @ rule.weights))
