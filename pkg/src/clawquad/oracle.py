"""Independent verification of planned profiles by numerical integration.

The closed-form sampler in :mod:`clawquad.profile` is cross-checked here by a
deliberately different route: the piecewise-linear jerk signal implied by a
plan's durations is laid out on a dense grid (100 kHz by default) and
integrated cumulatively with the trapezoid rule, jerk -> acceleration ->
velocity -> position.  Nothing from the closed-form displacement equations is
reused, only the phase durations themselves.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .profile import PlannedTrajectory, TrajectoryType

ORACLE_RATE_HZ = 100_000.0


@dataclass(frozen=True)
class IntegratedProfile:
    times: np.ndarray
    jerk: np.ndarray
    acceleration: np.ndarray
    velocity: np.ndarray
    position: np.ndarray


def _cumtrapz(y: np.ndarray, dt: float) -> np.ndarray:
    out = np.empty_like(y)
    out[0] = 0.0
    np.cumsum((y[1:] + y[:-1]) * (0.5 * dt), out=out[1:])
    return out


def jerk_signal(plan: PlannedTrajectory, times: np.ndarray) -> np.ndarray:
    """Exact jerk magnitude profile at the given times.

    The full move is the acceleration half, the cruise, and the
    time-mirrored deceleration half; within each half the jerk is a pair of
    opposite trapezoidal humps.
    """
    t1, t2, t3, t4 = plan.t1, plan.t2, plan.t3, plan.t4
    half = 4.0 * t1 + 2.0 * t2 + t3
    total = 2.0 * half + t4

    # Piecewise-linear breakpoints of one acceleration half.
    knots_t = [0.0, t1, t1 + t2, 2 * t1 + t2, 2 * t1 + t2 + t3,
               3 * t1 + t2 + t3, 3 * t1 + 2 * t2 + t3, half]
    knots_j = [0.0, plan.j_peak, plan.j_peak, 0.0, 0.0,
               -plan.j_peak, -plan.j_peak, 0.0]
    # Deduplicate zero-length phases so interpolation stays well defined.
    kt, kj = [], []
    for t, j in zip(knots_t, knots_j):
        if kt and t <= kt[-1] + 0.0:
            kt[-1], kj[-1] = t, j
            continue
        kt.append(t)
        kj.append(j)

    t = np.asarray(times, dtype=float)
    # Point symmetry of the position makes the jerk mirror-symmetric in time:
    # fold the deceleration half back onto the acceleration half unchanged,
    # and zero the cruise.
    t_fold = np.where(t > half + t4, total - t, t)
    j = np.interp(t_fold, kt, kj)
    j[(t > half) & (t <= half + t4)] = 0.0
    return j


def integrate_plan(plan: PlannedTrajectory, rate: float = ORACLE_RATE_HZ) -> IntegratedProfile:
    """Cumulative-trapezoid integration of the jerk profile at ``rate``."""
    duration = plan.duration
    if duration == 0.0:
        zero = np.zeros(1)
        return IntegratedProfile(zero, zero, zero.copy(), zero.copy(),
                                 np.array([plan.phi_0]))
    n = max(int(math.ceil(duration * rate)) + 1, 2)
    times = np.linspace(0.0, duration, n)
    dt = times[1] - times[0]
    jerk = jerk_signal(plan, times) * plan.direction
    acc = _cumtrapz(jerk, dt)
    vel = _cumtrapz(acc, dt)
    pos = plan.phi_0 + _cumtrapz(vel, dt)
    return IntegratedProfile(times, jerk, acc, vel, pos)


def positions_at(profile: IntegratedProfile, times: np.ndarray) -> np.ndarray:
    """Linear interpolation of the integrated position onto arbitrary times."""
    return np.interp(times, profile.times, profile.position)


def observed_type(plan: PlannedTrajectory, a_max: float, v_max: float,
                  rate: float = ORACLE_RATE_HZ, rel_tol: float = 1e-6) -> TrajectoryType:
    """Which bounds the integrated profile actually plateaus at."""
    prof = integrate_plan(plan, rate)
    hits_a = np.max(np.abs(prof.acceleration)) >= a_max * (1.0 - rel_tol)
    hits_v = np.max(np.abs(prof.velocity)) >= v_max * (1.0 - rel_tol)
    if hits_a and hits_v:
        return TrajectoryType.FULL
    if hits_a:
        return TrajectoryType.ACC_ONLY
    if hits_v:
        return TrajectoryType.VEL_ONLY
    return TrajectoryType.NEITHER
