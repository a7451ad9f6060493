"""Implicit Euler time stepping with a fixed-point inner iteration."""

import math
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from .assembly import SchemeOperators, assemble_nonlinear
from .banded import BandedPeriodicMatrix, SingularSystemError, solve_banded
from .diagnostics import window_stiffness
from .spline import SplineFunction
from .weight import compute_cr

__all__ = [
    "StepConfig", "TimeStepRecord", "StepFailure", "FixedPointDivergence",
    "StabilityBoundViolation", "CFLViolation", "CFLWarning", "solve_banded",
    "cfl_bound", "cfl_check", "cfl_time_step", "fixed_point_step", "advance",
    "time_interpolant",
]


class StepFailure(RuntimeError):
    """A time step could not be completed; ``history`` holds the records so far."""

    def __init__(self, message, history=None, t=None):
        super().__init__(message)
        self.history = history if history is not None else []
        self.t = t


class FixedPointDivergence(StepFailure):
    def __init__(self, message, contraction=math.nan, **kw):
        super().__init__(message, **kw)
        self.contraction = contraction


class StabilityBoundViolation(StepFailure):
    pass


class CFLViolation(StepFailure):
    pass


class CFLWarning(UserWarning):
    pass


@dataclass(frozen=True)
class StepConfig:
    dt: float
    max_iterations: int = 50
    L: float = 0.5
    min_iterations: int = 1
    strict_cfl: bool = False
    linear: bool = False  # drop the convection term (testing aid)

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if not 0.0 < self.L < 1.0:
            raise ValueError("L must lie in (0, 1)")
        if self.max_iterations < 1 or self.min_iterations < 1:
            raise ValueError("iteration limits must be >= 1")

    @property
    def K(self) -> float:
        return (7.0 - self.L) / (1.0 - self.L)


@dataclass(frozen=True, eq=False)
class TimeStepRecord:
    t_n: float
    coeffs: np.ndarray | None = field(repr=False)
    dt: float = 0.0
    iterations_used: int = 0
    last_contraction: float = math.nan
    last_contraction_weighted: float = math.nan
    cfl_margin: float = math.inf
    weighted_norm: float = 0.0
    l2_norm: float = 0.0
    h1_local: float = math.nan  # ||u_x||^2 on [-R, R]
    space: object = field(default=None, repr=False)


def cfl_bound(weighted_norm: float, C_R: float, L: float) -> float:
    """Largest admissible lambda = dt / dx^(3/2) for the fixed-point contraction."""
    if weighted_norm == 0.0:
        return math.inf
    K = (7.0 - L) / (1.0 - L)
    return L / (math.sqrt(C_R) * 2.0 * math.sqrt(2.0) * K * weighted_norm)


def cfl_check(u_n: SplineFunction, cfg: StepConfig, weight, space=None, C_R=None,
              weighted_norm=None) -> float:
    """Ratio of the admissible lambda to the actual lambda; >= 1 means the CFL bound holds."""
    space = space or u_n.space
    if C_R is None:
        C_R = compute_cr(weight, space.num_cells).C_R
    if weighted_norm is None:
        from .diagnostics import weighted_norm as _wn
        weighted_norm = _wn(u_n, weight)
    lam = cfg.dt / space.dx**1.5
    return cfl_bound(weighted_norm, C_R, cfg.L) / lam


def cfl_time_step(weighted_norm, C_R, L, dx, safety=0.9) -> float:
    return safety * cfl_bound(weighted_norm, C_R, L) * dx**1.5


class _StepContext:
    """Per-run cache: factorization of A + dt D, C_R, window matrix."""

    def __init__(self, ops: SchemeOperators, C_R=None, R_window=None):
        self.ops = ops
        self.C_R = C_R if C_R is not None else compute_cr(ops.weight, ops.space.num_cells).C_R
        self._dt = None
        self._factor = None
        self.window = window_stiffness(ops.space, R_window) if R_window is not None else None

    def factor(self, dt):
        if dt != self._dt:
            lhs: BandedPeriodicMatrix = self.ops.A + dt * self.ops.D
            self._factor = lhs.factorize()
            self._dt = dt
        return self._factor


def _norm(mat, v):
    # a diverging iterate may overflow; the caller checks for non-finite results
    with np.errstate(over="ignore", invalid="ignore"):
        return math.sqrt(max(float(v @ mat.matvec(v)), 0.0))


def fixed_point_step(ops: SchemeOperators, u_n: SplineFunction, cfg: StepConfig,
                     t_n: float = 0.0, _ctx: _StepContext | None = None, R_window=None):
    """One implicit Euler step.

    Iterates (A + dt D) w_new = A u_n - dt N(w) from w = u_n until the L2
    change drops below dx^2. Returns (u_next, record).
    """
    ctx = _ctx or _StepContext(ops, R_window=R_window)
    space = ops.space
    dt = cfg.dt
    mass = space.mass_matrix
    un = u_n.coeffs
    norm_n = _norm(ops.A, un)
    margin = cfl_bound(norm_n, ctx.C_R, cfg.L) / (dt / space.dx**1.5)
    if margin < 1.0 and cfg.strict_cfl:
        raise CFLViolation(f"CFL margin {margin:.3e} < 1 at t={t_n:.6g}", t=t_n)

    try:
        factor = ctx.factor(dt)
    except SingularSystemError as exc:
        raise StepFailure(f"linear system could not be factored: {exc}", t=t_n) from exc
    rhs0 = ops.A.matvec(un)
    tol = space.dx**2
    w = un
    prev = prev_w = math.nan
    contraction = contraction_w = math.nan
    for it in range(1, cfg.max_iterations + 1):
        rhs = rhs0 if cfg.linear else rhs0 - dt * assemble_nonlinear(ops, SplineFunction(space, w))
        if not np.all(np.isfinite(rhs)):
            raise FixedPointDivergence(f"iteration blew up at t={t_n:.6g}", contraction, t=t_n)
        try:
            w_new = factor.solve(rhs)
        except SingularSystemError as exc:
            raise StepFailure(f"linear solve failed: {exc}", t=t_n) from exc
        d = w_new - w
        diff = _norm(mass, d)
        diff_w = _norm(ops.A, d)
        if not math.isfinite(diff):
            raise FixedPointDivergence(f"iteration blew up at t={t_n:.6g}", contraction, t=t_n)
        if it > 1:
            contraction = diff / prev if prev > 0 else 0.0
            contraction_w = diff_w / prev_w if prev_w > 0 else 0.0
        prev, prev_w = diff, diff_w
        w = w_new
        if diff <= tol and it >= cfg.min_iterations:
            break
    else:
        raise FixedPointDivergence(
            f"no convergence in {cfg.max_iterations} iterations at t={t_n:.6g} "
            f"(last change {diff:.3e}, contraction {contraction:.3g})",
            contraction, t=t_n,
        )

    u_next = SplineFunction(space, w)
    wnorm = _norm(ops.A, w)
    if margin >= 1.0 and wnorm > cfg.K * norm_n * (1.0 + 1e-12):
        raise StabilityBoundViolation(
            f"weighted norm grew from {norm_n:.6g} to {wnorm:.6g} under the CFL bound", t=t_n
        )
    record = TimeStepRecord(
        t_n=t_n + dt,
        coeffs=u_next.coeffs,
        dt=dt,
        iterations_used=it,
        last_contraction=contraction,
        last_contraction_weighted=contraction_w,
        cfl_margin=margin,
        weighted_norm=wnorm,
        l2_norm=_norm(mass, w),
        h1_local=float(w @ ctx.window.matvec(w)) if ctx.window is not None else math.nan,
        space=space,
    )
    return u_next, record


def advance(ops: SchemeOperators, u0: SplineFunction, cfg: StepConfig, t_final: float,
            R_window=None, keep_coeffs=True, C_R=None):
    """Step from t = 0 to t_final; the last step is shortened to land on t_final.

    Returns the list of records, the first describing u0 itself.
    ``keep_coeffs`` is True (every record keeps its coefficients), False
    (only the first and last), or a sequence of times whose bracketing
    records are kept so that ``time_interpolant`` works there.
    On failure the raised StepFailure carries the partial history.
    """
    if keep_coeffs is True or keep_coeffs is False:
        keep_times = None
    else:
        keep_times = np.asarray(sorted(keep_coeffs), dtype=float)
        keep_coeffs = False
    if not t_final > 0:
        raise ValueError("t_final must be positive")
    ctx = _StepContext(ops, C_R=C_R, R_window=R_window)
    c0 = u0.coeffs
    history = [TimeStepRecord(
        t_n=0.0, coeffs=c0, weighted_norm=_norm(ops.A, c0), l2_norm=_norm(ops.space.mass_matrix, c0),
        h1_local=float(c0 @ ctx.window.matvec(c0)) if ctx.window is not None else math.nan,
        space=ops.space,
    )]
    u = u0
    nsteps = max(1, math.ceil(t_final / cfg.dt - 1e-9))
    violations = 0
    for n in range(nsteps):
        t = n * cfg.dt
        step_cfg = cfg if n < nsteps - 1 else replace(cfg, dt=t_final - t)
        try:
            u, rec = fixed_point_step(ops, u, step_cfg, t_n=t, _ctx=ctx)
        except StepFailure as exc:
            exc.history = history
            raise
        if n == nsteps - 1:
            rec = replace(rec, t_n=t_final)
        violations += rec.cfl_margin < 1.0
        if not keep_coeffs and len(history) > 1 and history[-1].coeffs is not None:
            lo, hi = history[-2].t_n, rec.t_n
            needed = keep_times is not None and np.any((keep_times > lo) & (keep_times <= hi))
            if not needed:
                history[-1] = replace(history[-1], coeffs=None)
        history.append(rec)
    if violations:
        warnings.warn(
            f"CFL bound violated in {violations} of {nsteps} steps "
            f"(min margin {min(r.cfl_margin for r in history[1:]):.3e})",
            CFLWarning, stacklevel=2,
        )
    return history


def time_interpolant(history, t: float) -> SplineFunction:
    """Linear-in-time blend u^n + (t - t_n)(u^{n+1} - u^n)/dt of the bracketing records."""
    if not history:
        raise ValueError("empty history")
    times = np.array([r.t_n for r in history])
    if not times[0] <= t <= times[-1]:
        raise ValueError(f"t={t} outside the recorded interval [{times[0]}, {times[-1]}]")
    n = min(int(np.searchsorted(times, t, side="right")) - 1, len(history) - 1)
    lo = history[n]
    if t == lo.t_n:
        pair = (lo,)
    else:
        pair = (lo, history[n + 1])
    for r in pair:
        if r.coeffs is None or r.space is None:
            raise ValueError(f"no coefficients stored at t={r.t_n}")
    if len(pair) == 1:
        return SplineFunction(lo.space, lo.coeffs)
    hi = pair[1]
    alpha = (t - lo.t_n) / (hi.t_n - lo.t_n)
    return SplineFunction(lo.space, (1.0 - alpha) * lo.coeffs + alpha * hi.coeffs)
