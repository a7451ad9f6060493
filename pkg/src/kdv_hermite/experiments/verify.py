"""Quick self-tests behind ``kdv-hermite verify``."""

import numpy as np

from .. import analytic
from ..assembly import assemble_dispersion, assemble_weighted_mass, identity_check
from ..banded import BandedPeriodicMatrix, solve_banded
from ..quadrature import gauss_legendre
from ..spline import SplineFunction, SplineSpace
from ..weight import AffineWeight, SmoothedRampWeight


def _identity_suite(rng, trials=100):
    worst = 0.0
    for _ in range(trials):
        R, width = rng.uniform(1.0, 5.0), rng.uniform(0.5, 2.0)
        space = SplineSpace(-8.0, 8.0, int(rng.choice([32, 48, 64])))
        weight = SmoothedRampWeight(R=R, width=width, x_left=-8.0, x_right=8.0)
        w = SplineFunction(space, rng.standard_normal(space.ndof))
        lhs, rhs = identity_check(space, weight, w)
        worst = max(worst, abs(lhs - rhs) / max(abs(lhs), abs(rhs)))
    return worst <= 1e-8, f"worst relative mismatch {worst:.2e}"


def _mass_spd(rng):
    worst = np.inf
    for m in (8, 16, 32):
        space = SplineSpace(-10.0, 10.0, m)
        A = assemble_weighted_mass(space, AffineWeight(50.0, 1.0, -10.0, 10.0)).to_dense()
        worst = min(worst, np.linalg.eigvalsh(0.5 * (A + A.T)).min())
    return worst > 0, f"smallest eigenvalue {worst:.3e}"


def _dispersion_form(rng):
    space = SplineSpace(-10.0, 10.0, 32)
    D = assemble_dispersion(space, AffineWeight(1.0, 0.0, -10.0, 10.0))
    worst = 0.0
    for _ in range(50):
        c = rng.standard_normal(space.ndof)
        worst = max(worst, abs(c @ D.matvec(c)) / (c @ c))
    return worst <= 1e-10, f"max |c^T D c| / |c|^2 = {worst:.2e}"


def _banded_solve(rng):
    n = 64
    local = rng.standard_normal((n // 2, 4, 4))
    local = local @ local.transpose(0, 2, 1) + 4 * np.eye(4)
    space = SplineSpace(0.0, 1.0, n // 2)
    mat = BandedPeriodicMatrix.from_element_matrices(local, space.cell_dofs, n)
    b = rng.standard_normal(n)
    x = solve_banded(mat, b)
    ref = np.linalg.solve(mat.to_dense(), b)
    err = np.max(np.abs(x - ref)) / np.max(np.abs(ref))
    return err <= 1e-10, f"relative deviation from dense solve {err:.2e}"


def _residuals(rng):
    x = rng.uniform(-10, 10, 20)
    t = rng.uniform(-2, 2, 20)
    r1 = max(abs(analytic.kdv_residual(analytic.one_soliton_mp, xi, ti)) for xi, ti in zip(x, t))
    r2 = max(abs(analytic.kdv_residual(analytic.two_soliton_mp, xi, ti)) for xi, ti in zip(x, t))
    return r1 <= 1e-4 and r2 <= 1e-3, f"one-soliton {r1:.2e}, two-soliton {r2:.2e}"


def _quadrature(rng):
    for order in (1, 6, 10, 20, 40):
        gauss_legendre(order)
    return True, "rules exact to degree 2n-1"


SUITES = [
    ("quadrature exactness", _quadrature),
    ("weighted mass SPD", _mass_spd),
    ("dispersion form vanishes for phi = 1", _dispersion_form),
    ("banded periodic solve", _banded_solve),
    ("integration-by-parts identity", _identity_suite),
    ("exact-solution KdV residuals", _residuals),
]


def run_verification(seed: int = 0) -> bool:
    rng = np.random.default_rng(seed)
    ok_all = True
    for name, fn in SUITES:
        ok, detail = fn(rng)
        ok_all &= ok
        print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    return ok_all
