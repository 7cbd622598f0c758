"""Time-synchronized trajectories for a vector of joints.

Every joint gets an individual plan; the joint with the longest total
duration sets the pace and all other plans are dilated onto that duration.
Uniform time dilation by a factor sigma preserves displacement exactly when
velocity scales by 1/sigma, acceleration by 1/sigma^2 and jerk by 1/sigma^3,
so the scaled plans stay within the original limits by construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .profile import (DEFAULT_RATE_HZ, MotionLimits, PlannedTrajectory,
                      ProfileInputError, plan, sample_on_grid)

# Plans whose durations differ by less than this are treated as ties; the
# lowest joint index wins.
TIE_EPS_S = 1e-6


@dataclass(frozen=True)
class SyncPlan:
    """Per-joint plans dilated to a common total duration.

    ``scale_factors[i]`` is the dilation sigma >= 1 applied to joint ``i``
    (``None`` for zero-displacement joints, which simply hold their position
    for the common duration).  Exactly one joint, ``limiting_index``, runs
    unscaled.
    """

    plans: tuple[PlannedTrajectory, ...]
    total_duration: float
    scale_factors: tuple[float | None, ...]
    limiting_index: int


def _dilate(p: PlannedTrajectory, sigma: float) -> PlannedTrajectory:
    return PlannedTrajectory(
        phi_0=p.phi_0,
        phi_1=p.phi_1,
        direction=p.direction,
        traj_type=p.traj_type,
        t1=p.t1 * sigma,
        t2=p.t2 * sigma,
        t3=p.t3 * sigma,
        t4=p.t4 * sigma,
        j_peak=p.j_peak / sigma**3,
        snap=p.snap / sigma**4,
    )


def plan_synchronized(phi_0, phi_1, limits: MotionLimits) -> SyncPlan:
    """Plan all joints so they start and finish together.

    ``phi_0`` and ``phi_1`` are equal-length sequences of start and target
    positions.  Raises :class:`ProfileInputError` for empty or mismatched
    vectors.
    """
    phi_0 = [float(x) for x in phi_0]
    phi_1 = [float(x) for x in phi_1]
    if len(phi_0) == 0:
        raise ProfileInputError("target vector must not be empty")
    if len(phi_0) != len(phi_1):
        raise ProfileInputError(
            f"start and target vectors differ in length ({len(phi_0)} vs {len(phi_1)})")

    base = [plan(a, b, limits) for a, b in zip(phi_0, phi_1)]
    durations = [p.duration for p in base]
    longest = max(durations)
    limiting = min(i for i, d in enumerate(durations) if d >= longest - TIE_EPS_S)

    plans: list[PlannedTrajectory] = []
    sigmas: list[float | None] = []
    for i, p in enumerate(base):
        if i == limiting:
            plans.append(p)
            sigmas.append(1.0)
        elif p.duration == 0.0:
            plans.append(p)
            sigmas.append(None)
        else:
            sigma = longest / p.duration
            plans.append(_dilate(p, sigma))
            sigmas.append(sigma)
    return SyncPlan(tuple(plans), longest, tuple(sigmas), limiting)


def sample_synchronized(sync: SyncPlan, rate: float = DEFAULT_RATE_HZ):
    """Sample every joint on one shared grid.

    Returns ``(times, positions)`` where ``positions`` has one row per joint
    and all rows share the grid spanning ``[0, total_duration]``.
    Zero-displacement joints emit a constant row.
    """
    if rate <= 0.0 or not math.isfinite(rate):
        raise ProfileInputError(f"rate must be finite and > 0, got {rate!r}")
    duration = sync.total_duration
    n = int(math.floor(duration * rate * (1.0 + 1e-12))) + 1
    if duration == 0.0 or n < 2:
        times = np.zeros(1)
        rows = np.array([[p.phi_0] for p in sync.plans])
        return times, rows
    times = np.linspace(0.0, duration, n)
    rows = np.empty((len(sync.plans), n))
    for i, p in enumerate(sync.plans):
        if sync.scale_factors[i] is None:
            rows[i, :] = p.phi_0
        else:
            rows[i, :] = sample_on_grid(p, times)
            rows[i, -1] = p.phi_1
    return times, rows


def write_csv_multi(times: np.ndarray, rows: np.ndarray, stream) -> None:
    """Write ``t_s,q0_rad,q1_rad,...`` rows, %.6f fixed point, LF endings."""
    header = "t_s," + ",".join(f"q{i}_rad" for i in range(rows.shape[0]))
    stream.write(header + "\n")
    for k, t in enumerate(times):
        stream.write(f"{t:.6f}," + ",".join(f"{rows[i, k]:.6f}" for i in range(rows.shape[0])) + "\n")
