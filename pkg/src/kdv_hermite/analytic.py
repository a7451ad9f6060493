"""Closed-form KdV solutions and initial data for u_t + u u_x + u_xxx = 0."""

import mpmath
import numpy as np

ONE_SOLITON_WIDTH = np.sqrt(3.0) / 2.0


def _sech2(z):
    # 4 e^{-2|z|} / (1 + e^{-2|z|})^2, overflow-free; rounding near z = 0 can exceed 1
    e = np.exp(-2.0 * np.abs(z))
    return np.minimum(4.0 * e / (1.0 + e) ** 2, 1.0)


def eval_one_soliton(x, t):
    """Amplitude-9, speed-3 soliton 9 sech^2(sqrt(3)/2 (x - 3t))."""
    x = np.asarray(x, dtype=float)
    return 9.0 * _sech2(ONE_SOLITON_WIDTH * (x - 3.0 * t))


def eval_two_soliton(x, t, a=0.5, b=1.0):
    """Two-soliton solution with speeds 2a < 2b colliding at t = 0.

    Multiplying numerator and denominator of
    6(b-a)(b csch^2 eta + a sech^2 xi) / (sqrt(a) tanh xi - sqrt(b) coth eta)^2
    by tanh^2 eta gives a form with no removable singularity at eta = 0 and a
    denominator bounded away from zero (|sqrt(a) tanh xi tanh eta| < sqrt(b)).
    """
    if not 0.0 < a < b:
        raise ValueError("two-soliton parameters need 0 < a < b")
    x = np.asarray(x, dtype=float)
    xi = np.sqrt(a / 2.0) * (x - 2.0 * a * t)
    eta = np.sqrt(b / 2.0) * (x - 2.0 * b * t)
    th_eta = np.tanh(eta)
    num = b * _sech2(eta) + a * _sech2(xi) * th_eta**2
    den = (np.sqrt(a) * np.tanh(xi) * th_eta - np.sqrt(b)) ** 2
    return 6.0 * (b - a) * num / den


def eval_rough_l2(x, period=10.0, x_left=-5.0):
    """x^(-1/3) on (0, 1), zero elsewhere on [-5, 5), extended periodically."""
    x = np.asarray(x, dtype=float)
    y = (x - x_left) % period + x_left
    inside = (y > 0.0) & (y < 1.0)
    out = np.where(inside, np.cbrt(np.where(inside, y, 1.0)) ** -1, 0.0)
    return float(out) if out.ndim == 0 else out


def one_soliton_mp(x, t):
    k = mpmath.sqrt(3) / 2
    return 9 * mpmath.sech(k * (x - 3 * t)) ** 2


def two_soliton_mp(x, t, a=0.5, b=1.0):
    a, b = mpmath.mpf(a), mpmath.mpf(b)
    xi = mpmath.sqrt(a / 2) * (x - 2 * a * t)
    eta = mpmath.sqrt(b / 2) * (x - 2 * b * t)
    th = mpmath.tanh(eta)
    num = b * mpmath.sech(eta) ** 2 + a * mpmath.sech(xi) ** 2 * th**2
    return 6 * (b - a) * num / (mpmath.sqrt(a) * mpmath.tanh(xi) * th - mpmath.sqrt(b)) ** 2


def kdv_residual(u_mp, x, t, h=1e-4, dps=40, **kw):
    """Central-difference u_t + u u_x + u_xxx at (x, t), in ``dps``-digit arithmetic.

    The third-difference quotient divides by h^3, so double precision would
    bury the residual in rounding noise at h = 1e-4.
    """
    with mpmath.workdps(dps):
        x, t, h = mpmath.mpf(x), mpmath.mpf(t), mpmath.mpf(h)
        f = lambda xx, tt: u_mp(xx, tt, **kw)
        u0 = f(x, t)
        ut = (f(x, t + h) - f(x, t - h)) / (2 * h)
        ux = (f(x + h, t) - f(x - h, t)) / (2 * h)
        uxxx = (f(x + 2 * h, t) - 2 * f(x + h, t) + 2 * f(x - h, t) - f(x - 2 * h, t)) / (2 * h**3)
        return float(ut + u0 * ux + uxxx)
