from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional

import numpy as np
from scipy.integrate import RK45
from scipy.interpolate import CubicHermiteSpline

from .constraints import drift_report, energy_series, primary_residual
from .dynamics import FieldEval, PhaseState, canonical_field, workhorse_field
from .model import CompositionRule, NonFiniteInput, WorkhorseModel, as_vector
from .projection import bundle_at, qbar_dot
from .trajectory import Trajectory

logger = logging.getLogger(__name__)

MIN_STEP = 1e-14
PRIMARY_WARN_TOLERANCE = 1e-9

ArrayField = Callable[[float, np.ndarray], np.ndarray]


class Method(str, Enum):
    RK4 = "rk4"
    RK45 = "rk45"


class InvalidOptions(ValueError):
    pass


class IntegrationError(Exception):
    def __init__(self, message: str, t: float, y: Optional[np.ndarray] = None) -> None:
        super().__init__(f"{message} (last good sample at t={t:.17g})")
        self.t = t
        self.y = y
        self.last_state: Optional[PhaseState] = None


class StepUnderflow(IntegrationError):
    pass


class MaxStepsExceeded(IntegrationError):
    pass


class NonFiniteState(IntegrationError):
    pass


class InterpolationGap(IntegrationError):
    pass


@dataclass
class IntegratorOptions:
    method: Method = Method.RK45
    t_span: tuple[float, float] = (0.0, 10.0)
    step: float = 1e-3
    rtol: float = 1e-10
    atol: float = 1e-12
    max_steps: int = 2_000_000
    sample_step: Optional[float] = None

    def __post_init__(self) -> None:
        try:
            self.method = Method(self.method)
        except ValueError:
            raise InvalidOptions(f"unknown method '{self.method}', use rk4 or rk45")

        t0, t1 = (float(x) for x in self.t_span)
        self.t_span = (t0, t1)
        if not t1 > t0:
            raise InvalidOptions(f"t_span must be increasing, got {self.t_span}")
        if not self.step > 0:
            raise InvalidOptions(f"step must be positive, got {self.step}")
        if not self.rtol >= 1e-13:
            raise InvalidOptions(f"rtol must be at least 1e-13, got {self.rtol}")
        if not self.atol > 0:
            raise InvalidOptions(f"atol must be positive, got {self.atol}")
        if self.max_steps < 1:
            raise InvalidOptions(f"max_steps must be positive, got {self.max_steps}")
        if self.sample_step is not None and not self.sample_step > 0:
            raise InvalidOptions(
                f"sample_step must be positive, got {self.sample_step}"
            )


def uniform_grid(t0: float, t1: float, h: float) -> np.ndarray:
    """``t0, t0 + h, ...`` ending exactly at ``t1`` (last interval may be short)."""
    n = int(np.floor((t1 - t0) / h * (1 + 1e-12)))
    times = t0 + h * np.arange(n + 1)
    if abs(times[-1] - t1) <= 1e-9 * h:
        times[-1] = t1
    elif times[-1] < t1:
        times = np.append(times, t1)
    return times


def _rk4(
    rhs: ArrayField, y0: np.ndarray, opts: IntegratorOptions
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    times = uniform_grid(*opts.t_span, opts.step)
    if times.size - 1 > opts.max_steps:
        raise MaxStepsExceeded(
            f"{times.size - 1} fixed steps exceed max_steps={opts.max_steps}",
            times[0],
            y0,
        )

    ys = np.empty((times.size, y0.size))
    ys[0] = y0
    for n in range(times.size - 1):
        t, y = times[n], ys[n]
        h = times[n + 1] - t
        try:
            k1 = rhs(t, y)
            k2 = rhs(t + h / 2, y + h / 2 * k1)
            k3 = rhs(t + h / 2, y + h / 2 * k2)
            k4 = rhs(t + h, y + h * k3)
        except NonFiniteInput as e:
            raise NonFiniteState(str(e), t, y.copy())

        y_next = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        if not np.all(np.isfinite(y_next)):
            raise NonFiniteState("state became non-finite", t, y.copy())
        ys[n + 1] = y_next

    return times, ys, np.diff(times)


def _rk45(
    rhs: ArrayField,
    y0: np.ndarray,
    opts: IntegratorOptions,
    t_eval: Optional[np.ndarray],
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    t0, t1 = opts.t_span
    grid = t_eval
    if grid is None and opts.sample_step is not None:
        grid = uniform_grid(t0, t1, opts.sample_step)

    solver = RK45(rhs, t0, y0, t1, rtol=opts.rtol, atol=opts.atol)
    times, ys, steps = [t0], [y0.copy()], []
    next_index = 1

    while solver.status == "running":
        if len(steps) >= opts.max_steps:
            raise MaxStepsExceeded(
                f"adaptive run needed more than max_steps={opts.max_steps}",
                solver.t,
                solver.y.copy(),
            )

        t_prev, y_prev = solver.t, solver.y.copy()
        try:
            message = solver.step()
        except NonFiniteInput as e:
            raise NonFiniteState(str(e), t_prev, y_prev)

        if solver.status == "failed":
            raise StepUnderflow(message or "step size underflow", t_prev, y_prev)
        if not np.all(np.isfinite(solver.y)):
            raise NonFiniteState("state became non-finite", t_prev, y_prev)

        taken = solver.t - t_prev
        if taken < MIN_STEP and solver.status == "running":
            raise StepUnderflow(
                f"adaptive step {taken:.3e} below {MIN_STEP}", t_prev, y_prev
            )
        steps.append(taken)

        if grid is None:
            times.append(solver.t)
            ys.append(solver.y.copy())
            continue

        dense = solver.dense_output()
        while next_index < grid.size and grid[next_index] <= solver.t:
            times.append(grid[next_index])
            ys.append(dense(grid[next_index]))
            next_index += 1

    return np.array(times), np.array(ys), np.array(steps)


def integrate_array(
    rhs: ArrayField,
    y0: np.ndarray,
    opts: IntegratorOptions,
    t_eval: Optional[np.ndarray] = None,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Integrate ``dy/dt = rhs(t, y)`` over ``opts.t_span``.

    Returns sample times, samples (one row per time) and the taken step sizes.
    ``t_eval`` (adaptive method only) picks output times from dense output.
    """
    y0 = np.asarray(y0, dtype=float)
    t0 = opts.t_span[0]
    try:
        finite = np.all(np.isfinite(y0)) and np.all(np.isfinite(rhs(t0, y0)))
    except NonFiniteInput:
        finite = False
    if not finite:
        raise NonFiniteState("field is not finite at the initial state", t0)

    if opts.method is Method.RK4:
        return _rk4(rhs, y0, opts)
    return _rk45(rhs, y0, opts, t_eval)


def integrate(
    field: Callable[[PhaseState], FieldEval],
    s0: PhaseState,
    opts: IntegratorOptions,
    model: Optional[WorkhorseModel] = None,
    rule: Optional[CompositionRule] = None,
) -> Trajectory:
    """Integrate a phase-space field from ``s0`` (placed at ``opts.t_span[0]``).

    Hamiltonian and constraint diagnostics are attached when ``model`` and
    ``rule`` are given.
    """
    dim_k, dim_i = s0.dim_k, s0.dim_i

    def rhs(t: float, y: np.ndarray) -> np.ndarray:
        return field(PhaseState.from_vector(t, y, dim_k, dim_i)).to_vector()

    try:
        times, ys, steps = integrate_array(rhs, s0.to_vector(), opts)
    except IntegrationError as e:
        if e.y is not None:
            e.last_state = PhaseState.from_vector(e.t, e.y, dim_k, dim_i)
        raise

    traj = _trajectory(times, ys, dim_k, dim_i, opts, steps)
    logger.debug("integrated %d samples with %d steps", len(traj), steps.size)

    if model is not None and rule is not None:
        attach_diagnostics(traj, model, rule)
    return traj


def _trajectory(times, ys, dim_k, dim_i, opts, steps) -> Trajectory:
    cuts = np.cumsum([dim_k, dim_i, dim_k])
    qbar, q, pbar, p = np.split(ys, cuts, axis=1)
    uniform = opts.step if opts.method is Method.RK4 else opts.sample_step
    return Trajectory(
        t=times, qbar=qbar, q=q, pbar=pbar, p=p, step=uniform, accepted_steps=steps
    )


def attach_diagnostics(
    traj: Trajectory, model: WorkhorseModel, rule: CompositionRule
) -> Trajectory:
    traj.energy = energy_series(model, rule, traj)
    traj.report = drift_report(model, rule, traj)
    return traj


def simulate(
    model: WorkhorseModel,
    rule: CompositionRule,
    s0: PhaseState,
    opts: IntegratorOptions,
) -> Trajectory:
    """Canonical flow on the enlarged space with diagnostics."""
    return integrate(lambda s: canonical_field(model, rule, s), s0, opts, model, rule)


def two_step_solve(
    model: WorkhorseModel,
    rule: CompositionRule,
    q0,
    p0,
    qbar0,
    opts: IntegratorOptions,
) -> Trajectory:
    """Workhorse flow for (q, p), then ``qbar`` recovered by post-processing.

    The momenta ``pbar`` vanish identically on the returned trajectory.
    """
    dim_i, dim_k = model.dim_i, rule.dim_k
    q0 = as_vector(q0, dim_i, "q0")
    p0 = as_vector(p0, dim_i, "p0")
    qbar0 = as_vector(qbar0, dim_k, "qbar0")

    offset = float(np.linalg.norm(primary_residual(rule, qbar0, q0)))
    if offset > PRIMARY_WARN_TOLERANCE:
        logger.warning(
            "initial state is off the primary constraint surface (residual %.3e)",
            offset,
        )

    def workhorse_rhs(t: float, y: np.ndarray) -> np.ndarray:
        return np.concatenate(workhorse_field(model, y[:dim_i], y[dim_i:]))

    times, ys, steps = integrate_array(workhorse_rhs, np.concatenate([q0, p0]), opts)
    q, p = ys[:, :dim_i], ys[:, dim_i:]
    velocity = np.array([(pj - model.u(qj)) / model.mass for qj, pj in zip(q, p)])
    path = CubicHermiteSpline(times, q, velocity, axis=0)
    span = (times[0], times[-1])
    slack = 1e-12 * max(1.0, abs(span[1]))

    def qbar_rhs(t: float, qbar: np.ndarray) -> np.ndarray:
        if t < span[0] - slack or t > span[1] + slack:
            raise InterpolationGap(
                f"post-processing needs q at t={t:.17g} outside the stored span", t
            )
        return qbar_dot(bundle_at(rule, qbar), path(min(max(t, span[0]), span[1])))

    t_eval = times if opts.method is Method.RK45 else None
    qbar_times, qbar, _ = integrate_array(qbar_rhs, qbar0, opts, t_eval=t_eval)
    if qbar_times.size != times.size:
        raise InterpolationGap(
            "post-processing grid does not match the workhorse grid", qbar_times[-1]
        )

    traj = Trajectory(
        t=times,
        qbar=qbar,
        q=q,
        pbar=np.zeros((times.size, dim_k)),
        p=p,
        step=opts.step if opts.method is Method.RK4 else opts.sample_step,
        accepted_steps=steps,
    )
    return attach_diagnostics(traj, model, rule)


@dataclass(frozen=True)
class ConsistencyResult:
    max_residual: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.max_residual <= self.tolerance


def consistency_check(
    rule: CompositionRule, traj: Trajectory, tolerance: float = 1e-6
) -> ConsistencyResult:
    """Largest primary residual along a trajectory against ``tolerance``."""
    if len(traj) == 0:
        raise ValueError("consistency check needs at least one sample")
    worst = max(
        float(np.linalg.norm(primary_residual(rule, qbar, q)))
        for qbar, q in zip(traj.qbar, traj.q)
    )
    return ConsistencyResult(max_residual=worst, tolerance=tolerance)


def growth_rate(times: np.ndarray, values: np.ndarray) -> Optional[float]:
    """Least-squares slope of ``log|values|`` against time; None without growth data."""
    magnitude = np.abs(np.asarray(values, dtype=float))
    mask = magnitude > 0
    if mask.sum() < 2:
        return None
    times = np.asarray(times, dtype=float)
    slope, _ = np.polyfit(times[mask], np.log(magnitude[mask]), 1)
    return float(slope)
