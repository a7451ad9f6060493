"""Weight functions phi >= 1, phi' >= 0 used in the weighted inner product."""

from dataclasses import dataclass
from functools import cached_property

import numpy as np
import mpmath

from .quadrature import gauss_legendre


class UnsupportedOrderError(ValueError):
    pass


def _bump(y, deriv=0):
    """Unnormalized exp(-1/(1-y^2)) on (-1, 1) and its first derivative."""
    y = np.asarray(y, dtype=float)
    inside = np.abs(y) < 1.0
    d = np.where(inside, 1.0 - y**2, 1.0)
    e = np.where(inside, np.exp(-1.0 / d), 0.0)
    if deriv == 0:
        return e
    if deriv == 1:
        return np.where(inside, e * (-2.0 * y / d**2), 0.0)
    raise UnsupportedOrderError(deriv)


_BUMP_MASS = float(mpmath.quad(lambda y: mpmath.exp(-1 / (1 - y**2)), [-1, 0, 1]))


@dataclass(frozen=True)
class AffineWeight:
    """phi(x) = a + b x on [x_left, x_right]."""

    a: float = 50.0
    b: float = 1.0
    x_left: float = -10.0
    x_right: float = 10.0

    kind = "affine"

    def __call__(self, x, deriv=0):
        x = np.asarray(x, dtype=float)
        if deriv == 0:
            return self.a + self.b * x
        if deriv == 1:
            return np.full_like(x, self.b)
        if deriv in (2, 3):
            return np.zeros_like(x)
        raise UnsupportedOrderError(f"weight derivative of order {deriv} not supported")

    def to_dict(self):
        return {"kind": self.kind, "a": self.a, "b": self.b, "x_left": self.x_left, "x_right": self.x_right}


@dataclass(frozen=True)
class SmoothedRampWeight:
    """Ramp max(1, min(1 + x + R, 1 + 2R)) mollified by a unit-mass bump of half-width ``width``.

    With rho the mollifier, W its distribution function and
    Phi(z) = int_{-inf}^z W = z W(z) - int_{-h}^z y rho(y) dy, the ramp is
    1 + relu(x + R) - relu(x - R), so

        phi = 1 + Phi(x + R) - Phi(x - R),   phi' = W(x + R) - W(x - R),
        phi'' = rho(x + R) - rho(x - R),     phi''' = rho'(x + R) - rho'(x - R).

    W and the first moment are Gauss integrals of the bump over [-h, z].
    """

    R: float = 5.0
    width: float = 1.0
    x_left: float = -10.0
    x_right: float = 10.0
    nquad: int = 80

    kind = "smoothed_ramp"

    def _mollifier(self, y, deriv=0):
        h = self.width
        return _bump(y / h, deriv) / (_BUMP_MASS * h ** (1 + deriv))

    def _moments(self, z):
        # W(z) and int_{-h}^{z} y rho(y) dy
        h = self.width
        rule = gauss_legendre(self.nquad)
        zc = np.clip(z, -h, h)[..., None]
        y = -h + (zc + h) * rule.points
        rho = self._mollifier(y) * rule.weights * (zc + h)
        return np.sum(rho, axis=-1), np.sum(rho * y, axis=-1)

    def _Phi(self, z):
        W, m1 = self._moments(z)
        return np.where(z >= self.width, z, z * W - m1)

    def __call__(self, x, deriv=0):
        x = np.asarray(x, dtype=float)
        R = self.R
        if deriv == 0:
            return 1.0 + self._Phi(x + R) - self._Phi(x - R)
        if deriv == 1:
            return self._moments(x + R)[0] - self._moments(x - R)[0]
        if deriv == 2:
            return self._mollifier(x + R) - self._mollifier(x - R)
        if deriv == 3:
            return self._mollifier(x + R, 1) - self._mollifier(x - R, 1)
        raise UnsupportedOrderError(f"weight derivative of order {deriv} not supported")

    def to_dict(self):
        return {
            "kind": self.kind, "R": self.R, "width": self.width,
            "x_left": self.x_left, "x_right": self.x_right,
        }


@dataclass(frozen=True)
class WeightConstant:
    C_R: float

    def __post_init__(self):
        if self.C_R < 1.0:
            raise ValueError("C_R must be >= 1")


def weight_eval(w, x, deriv=0):
    if deriv not in (0, 1, 2, 3):
        raise UnsupportedOrderError(f"weight derivative of order {deriv} not supported")
    out = w(x, deriv)
    return float(out) if np.ndim(out) == 0 else out


def compute_cr(w, num_cells: int = 200) -> WeightConstant:
    """max of sup|phi^(k)|, k = 0..3, over the weight's domain.

    Exact for affine weights (endpoint values); otherwise sampled on a grid of
    10 points per cell plus the endpoints.
    """
    if isinstance(w, AffineWeight):
        ends = np.array([w.x_left, w.x_right])
        return WeightConstant(float(max(np.max(np.abs(w(ends))), abs(w.b))))
    x = np.linspace(w.x_left, w.x_right, 10 * num_cells + 1)
    return WeightConstant(float(max(np.max(np.abs(w(x, d))) for d in range(4))))


def weight_from_dict(d):
    d = dict(d)
    kind = d.pop("kind")
    if kind == "affine":
        return AffineWeight(**d)
    if kind == "smoothed_ramp":
        return SmoothedRampWeight(**d)
    raise ValueError(f"unknown weight kind {kind!r}")
