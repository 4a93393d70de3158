"""PID closed-loop simulation and convergence verdicts.

The augmented state is w = (x_int, x1, x2) with

    d x_int / dt = e,   d x1 / dt = x2,   d x2 / dt = f(x1, x2) + b u,
    u = kp e + ki x_int + kd de/dt,   e = y* - x1,   de/dt = -x2.

The setpoint is constant, so de/dt is exactly -x2 and the integral starts at 0.
"""

import logging
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.integrate import solve_ivp

from .errors import DimensionError, DomainError, PlantEvaluationError, StiffnessError
from .models import ClassBounds, GainTriple, ScaledGains, SimConfig, Verdict
from .plants import Plant
from .regions import in_omega2, scale_gains

logger = logging.getLogger(__name__)

DEFAULT_HORIZON = 100.0
HORIZON_CAP = 50.0
DECAY_E_FOLDS = 20.0


@dataclass(frozen=True)
class TransformedState:
    """x = x_int + f(y*, 0) / k0, y = e, z = de/dt; rows are samples"""

    x: NDArray[np.float64]
    y: NDArray[np.float64]
    z: NDArray[np.float64]


@dataclass(frozen=True)
class Trajectory:
    """Sampled closed-loop solution; arrays are (samples, n)"""

    times: NDArray[np.float64]
    x1: NDArray[np.float64]
    x2: NDArray[np.float64]
    x_int: NDArray[np.float64]
    u: NDArray[np.float64]
    err_norm: NDArray[np.float64]
    ystar: NDArray[np.float64]
    verdict: Verdict = Verdict.UNDECIDED
    decision_time: Optional[float] = None

    @property
    def n(self) -> int:
        return self.x1.shape[1]

    @property
    def state_norm(self) -> NDArray[np.float64]:
        return np.sqrt(
            np.sum(self.x_int**2, axis=1)
            + np.sum(self.x1**2, axis=1)
            + np.sum(self.x2**2, axis=1)
        )

    @property
    def final_error(self) -> float:
        return float(self.err_norm[-1])


def decide(traj: Trajectory, cfg: SimConfig) -> tuple[Verdict, Optional[float]]:
    """Verdict and the time it was decided"""
    if traj.times.size == 0:
        raise DimensionError("empty trajectory")
    exceeded = np.nonzero(traj.state_norm > cfg.divergence_threshold)[0]
    if exceeded.size:
        return Verdict.DIVERGED, float(traj.times[exceeded[0]])

    residual = traj.err_norm + np.linalg.norm(traj.x2, axis=1)
    outside = np.nonzero(residual >= cfg.convergence_tol)[0]
    start = 0 if outside.size == 0 else int(outside[-1]) + 1
    if start < traj.times.size and traj.times[-1] - traj.times[start] >= cfg.dwell:
        return Verdict.CONVERGED, float(traj.times[start])
    return Verdict.UNDECIDED, None


def classify(traj: Trajectory, cfg: SimConfig) -> Verdict:
    """
    Converged iff |e| + |x2| stays below the tolerance from some sample to the
    end of the record, over at least the dwell window; Diverged iff the state
    norm crossed the threshold; Undecided otherwise.
    """
    return decide(traj, cfg)[0]


def _as_vector(x: ArrayLike, n: int, name: str) -> NDArray[np.float64]:
    arr = np.atleast_1d(np.asarray(x, dtype=float))
    if arr.shape != (n,):
        raise DimensionError(f"{name} must have shape ({n},), got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} must be finite")
    return arr


def _sample_times(cfg: SimConfig) -> NDArray[np.float64]:
    count = max(int(round(cfg.horizon / cfg.sample_dt)), 1)
    return np.linspace(0.0, cfg.horizon, count + 1)


def _integrate_rk45(rhs, w0, cfg: SimConfig) -> tuple[NDArray, NDArray]:
    def diverge(t: float, w: NDArray) -> float:
        return float(np.linalg.norm(w)) - cfg.divergence_threshold

    diverge.terminal = True  # type: ignore[attr-defined]
    diverge.direction = 1.0  # type: ignore[attr-defined]

    sol = solve_ivp(
        rhs,
        (0.0, cfg.horizon),
        w0,
        method="RK45",
        t_eval=_sample_times(cfg),
        atol=cfg.atol,
        rtol=cfg.rtol,
        events=diverge,
    )
    if sol.status == -1:
        raise StiffnessError(f"integration failed: {sol.message}")

    times, states = sol.t, sol.y.T
    if sol.status == 1 and sol.t_events[0].size:
        t_event = float(sol.t_events[0][0])
        if times.size == 0 or t_event > times[-1]:
            times = np.append(times, t_event)
            states = np.vstack([states, sol.y_events[0][0]])
    return times, states


def _integrate_rk4(rhs, w0, cfg: SimConfig) -> tuple[NDArray, NDArray]:
    h = cfg.step
    total = max(int(round(cfg.horizon / h)), 1)
    every = max(int(round(cfg.sample_dt / h)), 1)

    w = np.array(w0, dtype=float)
    times = [0.0]
    states = [w.copy()]
    for i in range(1, total + 1):
        t = (i - 1) * h
        k1 = rhs(t, w)
        k2 = rhs(t + h / 2, w + h / 2 * k1)
        k3 = rhs(t + h / 2, w + h / 2 * k2)
        k4 = rhs(t + h, w + h * k3)
        w = w + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        diverged = np.linalg.norm(w) > cfg.divergence_threshold
        if i % every == 0 or i == total or diverged:
            times.append(i * h)
            states.append(w.copy())
        if diverged:
            break
    return np.asarray(times), np.asarray(states)


def simulate(
    p: Plant,
    g: GainTriple,
    b_actual: float,
    ystar: ArrayLike,
    x0: ArrayLike,
    v0: ArrayLike,
    cfg: Optional[SimConfig] = None,
) -> Trajectory:
    """
    Integrate the PID closed loop from x1(0) = x0, x2(0) = v0, x_int(0) = 0.

    Args:
        p: Plant
        g: Raw PID gains
        b_actual: True input gain; below g.b_lower only warns
        ystar: Constant setpoint
        cfg: Integrator and verdict settings; an unset horizon is sized from
            the plant bounds by suggested_horizon

    Returns:
        Trajectory with its verdict
    """
    n = p.n
    if not b_actual > 0:
        raise DomainError(f"input gain must be positive, got {b_actual}")
    cfg = resolve_horizon(cfg or SimConfig(), g, b_actual, p.bounds)
    if b_actual < g.b_lower:
        logger.warning(
            "b_actual=%.6g is below b_lower=%.6g; no guarantee applies",
            b_actual,
            g.b_lower,
        )
    y_ref = _as_vector(ystar, n, "ystar")
    w0 = np.concatenate([np.zeros(n), _as_vector(x0, n, "x0"), _as_vector(v0, n, "v0")])

    def rhs(t: float, w: NDArray) -> NDArray:
        x_int, x1, x2 = w[:n], w[n : 2 * n], w[2 * n :]
        e = y_ref - x1
        u = g.kp * e + g.ki * x_int - g.kd * x2
        try:
            fval = p(x1, x2)
        except PlantEvaluationError as exc:
            raise PlantEvaluationError(
                f"{exc.detail} at t={t:.6g}", point={"t": t, "state": w.tolist()}
            ) from exc
        return np.concatenate([e, x2, fval + b_actual * u])

    if cfg.integrator == "rk4":
        times, states = _integrate_rk4(rhs, w0, cfg)
    else:
        times, states = _integrate_rk45(rhs, w0, cfg)

    x_int = states[:, :n]
    x1 = states[:, n : 2 * n]
    x2 = states[:, 2 * n :]
    e = y_ref - x1
    traj = Trajectory(
        times=times,
        x1=x1,
        x2=x2,
        x_int=x_int,
        u=g.kp * e + g.ki * x_int - g.kd * x2,
        err_norm=np.linalg.norm(e, axis=1),
        ystar=y_ref,
    )
    verdict, decided_at = decide(traj, cfg)
    logger.debug("Simulation finished at t=%.3f: %s", times[-1], verdict.value)
    return replace(traj, verdict=verdict, decision_time=decided_at)


def transform_state(
    p: Plant,
    s: ScaledGains,
    ystar: ArrayLike,
    x1: ArrayLike,
    x2: ArrayLike,
    x_int: ArrayLike,
) -> TransformedState:
    """(x, y, z) = (x_int + f(y*, 0) / k0, y* - x1, -x2); accepts sample rows"""
    if s.k0 == 0:
        raise DomainError("transformed coordinates need k0 != 0")
    y_ref = np.asarray(ystar, dtype=float)
    offset = p(y_ref, p.zero()) / s.k0
    return TransformedState(
        x=np.asarray(x_int, dtype=float) + offset,
        y=y_ref - np.asarray(x1, dtype=float),
        z=-np.asarray(x2, dtype=float),
    )


def trajectory_state(p: Plant, s: ScaledGains, traj: Trajectory) -> TransformedState:
    """Transformed coordinates of every sample of a trajectory"""
    return transform_state(p, s, traj.ystar, traj.x1, traj.x2, traj.x_int)


def suggested_horizon(
    s: ScaledGains, bounds: ClassBounds, base: float = DEFAULT_HORIZON
) -> float:
    """
    Horizon heuristic: long enough for the slowest root of the worst-case
    cubic to decay by DECAY_E_FOLDS, never below base nor above 50x base.
    Gains outside Omega2 get base. Not derived from any bound.
    """
    if not in_omega2(s, bounds).in_region:
        return base
    roots = np.roots([1.0, s.k2 - bounds.L2, s.k1 - bounds.L1, s.k0])
    rate = -float(roots.real.max())
    if rate <= 0:
        return base
    return min(max(base, DECAY_E_FOLDS / rate), HORIZON_CAP * base)


def resolve_horizon(
    cfg: SimConfig, g: GainTriple, b_actual: float, bounds: Optional[ClassBounds]
) -> SimConfig:
    """cfg with an unset horizon filled in from the gains, else unchanged"""
    if cfg.horizon is not None:
        return cfg
    horizon = DEFAULT_HORIZON
    if bounds is not None:
        horizon = suggested_horizon(scale_gains(g, b_actual), bounds)
    logger.debug("Horizon set to %.6g", horizon)
    return cfg.model_copy(update={"horizon": horizon})
