"""Per-resolution runs of the soliton and rough-data experiments."""

import logging
import math
import os
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from functools import partial

import numpy as np

from .. import analytic
from ..assembly import build_operators
from ..diagnostics import ErrorReport, error_percent, error_table, kato_functional, l2_difference
from ..solver import CFLWarning, StepConfig, StepFailure, advance, cfl_time_step, time_interpolant
from ..spline import SplineFunction, SplineSpace, project_l2
from ..weight import compute_cr
from .config import ExperimentConfig

log = logging.getLogger(__name__)


@dataclass
class RunResult:
    M: int
    dx: float
    dt: float
    c_cfl: float
    steps: int = 0
    ok: bool = True
    message: str = ""
    coeffs: np.ndarray | None = None
    snapshots: dict = field(default_factory=dict)
    step_log: list = field(default_factory=list)
    l2_initial: float = math.nan
    kato: float = math.nan
    min_cfl_margin: float = math.nan


@dataclass
class RunArtifacts:
    config: ExperimentConfig
    table: list
    runs: list
    profiles: dict = field(default_factory=dict)  # time -> (x, u_numeric, u_exact or None)
    profile_M: int | None = None
    self_differences: list = field(default_factory=list)  # (M, 2M, ||u_M - u_2M||)
    oracle_available: bool | None = None
    derived: dict = field(default_factory=dict)

    @property
    def failed(self):
        return [r for r in self.runs if not r.ok]


def initial_function(cfg: ExperimentConfig):
    prof, t0 = cfg.profile, cfg.t_start_shift
    if prof == "one_soliton":
        return lambda x: analytic.eval_one_soliton(x, t0), ()
    if prof == "two_soliton":
        return lambda x: analytic.eval_two_soliton(x, t0, cfg.soliton_a, cfg.soliton_b), ()
    if prof == "rough_l2":
        period = cfg.x_right - cfg.x_left
        f = partial(analytic.eval_rough_l2, period=period, x_left=cfg.x_left)
        return f, (0.0, 1.0)
    raise ValueError(f"unknown initial profile {prof!r}")


def exact_function(cfg: ExperimentConfig, t: float):
    """Closed form at simulation time t, or None."""
    prof, ts = cfg.profile, t + cfg.t_start_shift
    if prof == "one_soliton":
        return lambda x: analytic.eval_one_soliton(x, ts)
    if prof == "two_soliton":
        return lambda x: analytic.eval_two_soliton(x, ts, cfg.soliton_a, cfg.soliton_b)
    return None


def time_step_for(cfg: ExperimentConfig, dx: float, weighted_norm0: float, C_R: float):
    """(dt, c_cfl) for one resolution; c_cfl is the admissible dt / dx^(3/2) at t = 0."""
    c_cfl = cfg.cfl_safety * cfl_time_step(weighted_norm0, C_R, cfg.L, 1.0, safety=1.0)
    if cfg.dt_mode == "cfl_three_halves":
        dt = c_cfl * dx**1.5
    elif cfg.dt_mode == "dx_squared":
        dt = cfg.dt_c * dx**2
    else:
        dt = cfg.dt_c * dx
    if not math.isfinite(dt):
        # zero data: any step is admissible; fall back to dx^2 scaling
        dt = cfg.dt_c * dx**2
    return dt, c_cfl


def run_resolution(cfg: ExperimentConfig, M: int) -> RunResult:
    """Project the initial data, advance to t_final, keep the final state and snapshots."""
    space = SplineSpace(cfg.x_left, cfg.x_right, M)
    weight = cfg.weight()
    ops = build_operators(space, weight, cfg.quad_order)
    C_R = compute_cr(weight, M).C_R
    f0, breaks = initial_function(cfg)
    u0 = project_l2(space, f0, breakpoints=breaks, order=cfg.projection_order)
    wn0 = math.sqrt(max(float(u0.coeffs @ ops.A.matvec(u0.coeffs)), 0.0))
    dt, c_cfl = time_step_for(cfg, space.dx, wn0, C_R)
    step_cfg = StepConfig(
        dt=dt, max_iterations=cfg.max_iterations, L=cfg.L,
        min_iterations=cfg.min_iterations, strict_cfl=cfg.strict_cfl,
    )
    result = RunResult(M=M, dx=space.dx, dt=dt, c_cfl=c_cfl, l2_initial=u0.l2_norm())
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", CFLWarning)
        try:
            history = advance(ops, u0, step_cfg, cfg.t_final, R_window=cfg.R_window,
                              keep_coeffs=cfg.times, C_R=C_R)
        except StepFailure as exc:
            history = exc.history
            result.ok = False
            result.message = str(exc)
    result.steps = len(history) - 1
    result.step_log = [
        (r.t_n, r.iterations_used, r.last_contraction, r.cfl_margin, r.l2_norm, r.weighted_norm, r.h1_local)
        for r in history[1:]
    ]
    result.kato = kato_functional(history)
    if len(history) > 1:
        result.min_cfl_margin = min(r.cfl_margin for r in history[1:])
    if result.ok:
        result.coeffs = np.array(history[-1].coeffs)
        for t in cfg.times:
            result.snapshots[t] = time_interpolant(history, t).coeffs.copy()
    return result


def _run_all(cfg: ExperimentConfig, Ms):
    workers = cfg.workers or os.cpu_count() or 1
    if workers <= 1 or len(Ms) <= 1:
        return [run_resolution(cfg, m) for m in Ms]
    with ProcessPoolExecutor(max_workers=min(workers, len(Ms))) as pool:
        return list(pool.map(run_resolution, [cfg] * len(Ms), Ms))


def _profile(cfg, run: RunResult, t: float, samples_per_cell: int = 4):
    space = SplineSpace(cfg.x_left, cfg.x_right, run.M)
    u = SplineFunction(space, run.snapshots[t])
    x = cfg.x_left + space.dx * np.arange(run.M * samples_per_cell) / samples_per_cell
    exact = exact_function(cfg, t)
    return x, u(x), (exact(x) if exact is not None else None)


def _finish(cfg, runs, errors, l2_exact, l2_num, **extra):
    table = error_table(cfg.M_list, errors, l2_exact, l2_num)
    arts = RunArtifacts(config=cfg, table=table, runs=runs, **extra)
    ok_runs = [r for r in runs if r.ok]
    if ok_runs:
        finest = ok_runs[-1]
        arts.profile_M = finest.M
        arts.profiles = {t: _profile(cfg, finest, t) for t in cfg.times}
    arts.derived.update({
        "K": cfg.K,
        "C_R": {r.M: compute_cr(cfg.weight(), r.M).C_R for r in runs},
        "dt": {r.M: r.dt for r in runs},
        "dx": {r.M: r.dx for r in runs},
        "c_cfl": {r.M: r.c_cfl for r in runs},
        "steps": {r.M: r.steps for r in runs},
        "kato_functional": {r.M: r.kato for r in runs},
        "min_cfl_margin": {r.M: r.min_cfl_margin for r in runs},
        "status": {r.M: ("ok" if r.ok else r.message) for r in runs},
    })
    return arts


def _closed_form_errors(cfg, runs):
    exact = exact_function(cfg, cfg.t_final)
    errors, l2e, l2n = [], [], []
    for r in runs:
        if not r.ok:
            errors.append(None), l2e.append(math.nan), l2n.append(math.nan)
            continue
        space = SplineSpace(cfg.x_left, cfg.x_right, r.M)
        u = SplineFunction(space, r.coeffs)
        errors.append(error_percent(exact, u, order=cfg.error_order))
        l2e.append(_l2_of(exact, space, cfg.error_order))
        l2n.append(u.l2_norm())
    return errors, l2e, l2n


def _l2_of(func, space, order):
    from ..diagnostics import _window_quadrature
    k, s, w = _window_quadrature(space, space.x_left, space.x_right, order)
    x = space.x_left + space.dx * (k[:, None] + s)
    return math.sqrt(float(np.sum(w * func(x) ** 2)))


def run_one_soliton(cfg: ExperimentConfig) -> RunArtifacts:
    if cfg.profile != "one_soliton":
        raise ValueError("run_one_soliton needs one-soliton data")
    runs = _run_all(cfg, cfg.M_list)
    return _finish(cfg, runs, *_closed_form_errors(cfg, runs))


def run_two_soliton(cfg: ExperimentConfig) -> RunArtifacts:
    if cfg.profile != "two_soliton":
        raise ValueError("run_two_soliton needs two-soliton data")
    runs = _run_all(cfg, cfg.M_list)
    return _finish(cfg, runs, *_closed_form_errors(cfg, runs))


def self_convergence_oracle(cfg: ExperimentConfig, M_reference: int) -> SplineFunction:
    """Fine-grid run of the same experiment, used as the reference solution."""
    if cfg.M_list and M_reference < 4 * max(cfg.M_list):
        raise ValueError("reference resolution must be at least 4 * max(M_list)")
    run = run_resolution(replace(cfg, output_times=[]), M_reference)
    if not run.ok:
        raise StepFailure(f"reference run failed: {run.message}")
    return SplineFunction(SplineSpace(cfg.x_left, cfg.x_right, M_reference), run.coeffs)


def _self_differences(cfg, runs):
    sols = {r.M: SplineFunction(SplineSpace(cfg.x_left, cfg.x_right, r.M), r.coeffs) for r in runs if r.ok}
    return [(m, 2 * m, l2_difference(sols[m], sols[2 * m])) for m in sorted(sols) if 2 * m in sols]


def run_rough_l2(cfg: ExperimentConfig) -> RunArtifacts:
    """Rough data; errors are measured against a fine-grid oracle run.

    Without an oracle (``oracle_M = 0``) or when the oracle run fails, the
    finest run in M_list serves as the reference.
    """
    if cfg.profile != "rough_l2":
        raise ValueError("run_rough_l2 needs the rough L2 data")
    Ms = list(cfg.M_list)
    oracle_ok = None
    if cfg.oracle_M:
        Ms.append(cfg.oracle_M)
    all_runs = _run_all(cfg, Ms)
    runs = all_runs[: len(cfg.M_list)]
    ref = None
    if cfg.oracle_M:
        oracle_run = all_runs[-1]
        oracle_ok = oracle_run.ok
        if oracle_ok:
            ref = SplineFunction(SplineSpace(cfg.x_left, cfg.x_right, oracle_run.M), oracle_run.coeffs)
        else:
            log.warning("oracle run at M=%d failed: %s", oracle_run.M, oracle_run.message)
    if ref is None:
        ok = [r for r in runs if r.ok]
        if ok:
            ref = SplineFunction(SplineSpace(cfg.x_left, cfg.x_right, ok[-1].M), ok[-1].coeffs)
    errors, l2e, l2n = [], [], []
    ref_norm = ref.l2_norm() if ref is not None else math.nan
    for r in runs:
        if not r.ok or ref is None:
            errors.append(None), l2e.append(math.nan), l2n.append(math.nan)
            continue
        u = SplineFunction(SplineSpace(cfg.x_left, cfg.x_right, r.M), r.coeffs)
        errors.append(100.0 * l2_difference(u, ref, cfg.error_order) / ref_norm)
        l2e.append(ref_norm)
        l2n.append(u.l2_norm())
    arts = _finish(cfg, runs, errors, l2e, l2n,
                   self_differences=_self_differences(cfg, runs), oracle_available=oracle_ok)
    if cfg.oracle_M:
        arts.derived["oracle"] = {"M": cfg.oracle_M, "available": oracle_ok,
                                  "dt": all_runs[-1].dt, "status": all_runs[-1].message or "ok"}
    return arts


RUNNERS = {
    "one_soliton": run_one_soliton,
    "two_soliton": run_two_soliton,
    "rough_l2": run_rough_l2,
}


def run_experiment(cfg: ExperimentConfig) -> RunArtifacts:
    return RUNNERS[cfg.profile](cfg)
