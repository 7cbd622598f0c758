"""Jerk-limited point-to-point motion profiles for position-commanded servos.

A move is planned as a fourth-order profile: jerk is trapezoidal (ramped at a
bounded snap rate), which yields a smoothed trapezoidal velocity curve.  The
whole profile consists of 15 phases described by four durations:

    t1  snap ramp (jerk 0 -> j_peak, and every mirrored ramp)
    t2  constant jerk
    t3  constant acceleration
    t4  constant (cruise) velocity

The acceleration half is ``ramp / hold / ramp  +  a-hold  +  ramp / hold /
ramp`` (7 phases), followed by the cruise phase and a time-mirrored
deceleration half: 7 + 1 + 7 = 15.  Closed forms used throughout:

    j_peak = s * t1
    a_peak = j_peak * (t1 + t2)
    v_peak = a_peak * (2*t1 + t2 + t3)
    |D|    = v_peak * (4*t1 + 2*t2 + t3 + t4)

Planning is rest-to-rest and exact: the durations are solved so the analytic
displacement equals the requested one to machine precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

DEFAULT_RATE_HZ = 1000.0

# Paper-regime servo limits used as defaults everywhere.
DEFAULT_J_MAX = 15.0   # rad/s^3
DEFAULT_A_MAX = 15.0   # rad/s^2
DEFAULT_V_MAX = 5.2    # rad/s


class ProfileInputError(ValueError):
    """Raised for non-finite or otherwise unusable planner inputs."""


class PulseRangeError(ValueError):
    """Raised when angles exceed the servo calibration beyond the clamp tolerance."""

    def __init__(self, indices, message):
        super().__init__(message)
        self.indices = list(indices)


class TrajectoryType(Enum):
    """Which of the acceleration / velocity bounds the profile attains."""

    FULL = "full"          # a_max and v_max both reached
    ACC_ONLY = "acc_only"  # a_max reached, v_max not
    VEL_ONLY = "vel_only"  # v_max reached, a_max not
    NEITHER = "neither"    # displacement too small for either bound


@dataclass(frozen=True)
class MotionLimits:
    """Kinematic bounds for one joint.

    ``s_max`` is the snap bound, i.e. the slope of the jerk ramps.  When it is
    omitted it defaults to ``10 * j_max`` so the ramps occupy a small fraction
    of the constant-jerk budget.  If the limits are chosen such that the ramp
    alone would overshoot ``a_max`` (``j_max**2 > a_max * s_max``) the planner
    silently caps the peak jerk instead of rejecting the limits.
    """

    j_max: float = DEFAULT_J_MAX
    a_max: float = DEFAULT_A_MAX
    v_max: float = DEFAULT_V_MAX
    s_max: float | None = None

    def __post_init__(self):
        if self.s_max is None:
            object.__setattr__(self, "s_max", 10.0 * self.j_max)
        for name in ("j_max", "a_max", "v_max", "s_max"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0.0):
                raise ProfileInputError(f"{name} must be finite and > 0, got {value!r}")

    @property
    def j_cap(self) -> float:
        """Peak jerk actually usable: ramping up and straight back down at
        ``s_max`` must not overshoot ``a_max``."""
        return min(self.j_max, math.sqrt(self.a_max * self.s_max))


@dataclass(frozen=True)
class Classification:
    """Trajectory type plus the reference thresholds it was decided from.

    ``v_aref`` is the velocity change needed for the acceleration hump to
    plateau at ``a_max``; ``d_aref`` / ``d_vref`` are the minimal displacements
    for ``a_max`` / ``v_max`` to be reached.  When ``v_max < v_aref`` the
    acceleration bound is unreachable for any displacement and the thresholds
    keep their unconstrained-velocity values for reference.
    """

    traj_type: TrajectoryType
    v_aref: float
    d_aref: float
    d_vref: float


@dataclass(frozen=True)
class PlannedTrajectory:
    """Closed-form plan for one joint: type, durations and realized peak jerk."""

    phi_0: float
    phi_1: float
    direction: int                 # sign of phi_1 - phi_0
    traj_type: TrajectoryType
    t1: float
    t2: float
    t3: float
    t4: float
    j_peak: float                  # realized peak jerk, >= 0
    snap: float                    # ramp slope used (equals limits.s_max unless degenerate)

    @property
    def duration(self) -> float:
        return 2.0 * (4.0 * self.t1 + 2.0 * self.t2 + self.t3) + self.t4

    @property
    def a_peak(self) -> float:
        return self.j_peak * (self.t1 + self.t2)

    @property
    def v_peak(self) -> float:
        return self.a_peak * (2.0 * self.t1 + self.t2 + self.t3)

    @property
    def displacement(self) -> float:
        """Analytic displacement magnitude implied by the durations."""
        return self.v_peak * (4.0 * self.t1 + 2.0 * self.t2 + self.t3 + self.t4)


@dataclass(frozen=True)
class SampledTrajectory:
    """Uniformly sampled position series covering the whole move.

    The grid spans ``[0, duration]`` with ``floor(duration * rate) + 1``
    points, endpoints included, so the spacing differs from the nominal
    period by at most one part in the sample count.  ``times`` carries the
    actual timestamps.
    """

    rate: float
    duration: float
    positions: np.ndarray

    @property
    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.duration, len(self.positions))


@dataclass(frozen=True)
class ServoCalibration:
    """Affine angle-to-pulse-width map over a servo's mechanical range."""

    angle_min_deg: float = -150.0
    angle_max_deg: float = 150.0
    pulse_min_us: float = 500.0
    pulse_max_us: float = 2500.0
    neutral_deg: float = 0.0

    def __post_init__(self):
        if not self.angle_min_deg < self.angle_max_deg:
            raise ProfileInputError("angle_min_deg must be < angle_max_deg")
        if not self.pulse_min_us < self.pulse_max_us:
            raise ProfileInputError("pulse_min_us must be < pulse_max_us")
        if not self.angle_min_deg <= self.neutral_deg <= self.angle_max_deg:
            raise ProfileInputError("neutral_deg must lie within the angle range")


def _newton_increasing(f, fprime, x0, max_iter=60):
    # f strictly increasing and convex on [0, x0] with f(x0) >= 0: Newton from
    # the right converges monotonically onto the root.
    x = x0
    for _ in range(max_iter):
        fx = f(x)
        step = fx / fprime(x)
        x_next = x - step
        if x_next < 0.0:
            x_next = 0.0
        if abs(x_next - x) <= 1e-16 * max(1.0, abs(x)):
            return x_next
        x = x_next
    return x


def _hump_for_velocity(v: float, limits: MotionLimits) -> tuple[float, float]:
    """Durations (t1, t2) of a single jerk hump pair producing velocity ``v``
    with no constant-acceleration phase."""
    s = limits.s_max
    j = limits.j_cap
    t1_full = j / s
    v_jref = 2.0 * j * t1_full * t1_full
    if v >= v_jref:
        t1 = t1_full
        t2 = 0.5 * (-3.0 * t1 + math.sqrt(t1 * t1 + 4.0 * v / j))
        return t1, max(t2, 0.0)
    return (v / (2.0 * s)) ** (1.0 / 3.0), 0.0


def _solve_magnitude(d: float, limits: MotionLimits):
    """Solve durations for displacement magnitude ``d`` >= 0.

    Returns ``(traj_type, t1, t2, t3, t4, classification)``.  Degenerate
    phases are shrunk in the order t4, t3, t2, t1 so that the smoothest
    structure compatible with the displacement survives.
    """
    s = limits.s_max
    j = limits.j_cap
    a = limits.a_max
    v = limits.v_max

    t1_full = j / s
    t2_amax = a / j - t1_full           # >= 0 by construction of j_cap
    p = 2.0 * t1_full + t2_amax
    v_aref = a * p
    d_aref = v_aref * 2.0 * p

    if v >= v_aref:
        t3_vmax = v / a - p
        d_vref = v * (2.0 * p + t3_vmax)
        cls = Classification(TrajectoryType.NEITHER, v_aref, d_aref, d_vref)
        if d > d_vref:
            t4 = (d - d_vref) / v
            return TrajectoryType.FULL, t1_full, t2_amax, t3_vmax, t4, cls
        if d > d_aref:
            t3 = 0.5 * (-3.0 * p + math.sqrt(p * p + 4.0 * d / a))
            return TrajectoryType.ACC_ONLY, t1_full, t2_amax, t3, 0.0, cls
    else:
        t1_v, t2_v = _hump_for_velocity(v, limits)
        d_vref = v * (4.0 * t1_v + 2.0 * t2_v)
        cls = Classification(TrajectoryType.NEITHER, v_aref, d_aref, d_vref)
        if d > d_vref:
            t4 = (d - d_vref) / v
            return TrajectoryType.VEL_ONLY, t1_v, t2_v, 0.0, t4, cls

    # Neither bound is reached: t3 = t4 = 0, displacement carried entirely by
    # the two jerk-hump pairs.
    d_jref = 8.0 * j * t1_full ** 3
    if d >= d_jref:
        t1 = t1_full
        target = d / (2.0 * j)

        def f(u):
            return (t1 + u) * (2.0 * t1 + u) ** 2 - target

        def fprime(u):
            w = 2.0 * t1 + u
            return w * w + 2.0 * (t1 + u) * w

        u0 = target ** (1.0 / 3.0)
        t2 = _newton_increasing(f, fprime, u0)
        return TrajectoryType.NEITHER, t1, t2, 0.0, 0.0, cls
    t1 = (d / (8.0 * s)) ** 0.25
    return TrajectoryType.NEITHER, t1, 0.0, 0.0, 0.0, cls


def classify(phi_0: float, phi_1: float, limits: MotionLimits) -> Classification:
    """Decide which bounds a move from ``phi_0`` to ``phi_1`` will attain.

    The thresholds are returned alongside the type; the decision compares
    ``|phi_1 - phi_0|`` and ``v_max`` against them with strict inequalities,
    so a move that only touches a bound for a single instant is not counted
    as reaching it.
    """
    for name, value in (("phi_0", phi_0), ("phi_1", phi_1)):
        if not math.isfinite(value):
            raise ProfileInputError(f"{name} must be finite, got {value!r}")
    traj_type, _, _, _, _, cls = _solve_magnitude(abs(phi_1 - phi_0), limits)
    return Classification(traj_type, cls.v_aref, cls.d_aref, cls.d_vref)


def plan(phi_0: float, phi_1: float, limits: MotionLimits) -> PlannedTrajectory:
    """Plan a rest-to-rest move.  Every finite displacement is plannable."""
    for name, value in (("phi_0", phi_0), ("phi_1", phi_1)):
        if not math.isfinite(value):
            raise ProfileInputError(f"{name} must be finite, got {value!r}")
    d = phi_1 - phi_0
    direction = (d > 0.0) - (d < 0.0)
    traj_type, t1, t2, t3, t4, _ = _solve_magnitude(abs(d), limits)
    return PlannedTrajectory(
        phi_0=phi_0,
        phi_1=phi_1,
        direction=direction,
        traj_type=traj_type,
        t1=t1,
        t2=t2,
        t3=t3,
        t4=t4,
        j_peak=limits.s_max * t1,
        snap=limits.s_max,
    )


def _half_segments(plan_: PlannedTrajectory):
    """Snap segments of the first half of the move, up to mid-cruise.

    Each entry is ``(duration, snap)``; jerk/acceleration/velocity/position
    follow by exact polynomial propagation.
    """
    s = plan_.snap
    t1, t2, t3, t4 = plan_.t1, plan_.t2, plan_.t3, plan_.t4
    return [
        (t1, s),
        (t2, 0.0),
        (t1, -s),
        (t3, 0.0),
        (t1, -s),
        (t2, 0.0),
        (t1, s),
        (0.5 * t4, 0.0),
    ]


def _segment_states(segments):
    """Cumulative ``(t, x, v, a, j)`` at each segment start."""
    bounds = [0.0]
    states = [(0.0, 0.0, 0.0, 0.0)]
    x = v = a = j = 0.0
    t = 0.0
    for dt, snap in segments:
        x += v * dt + a * dt**2 / 2.0 + j * dt**3 / 6.0 + snap * dt**4 / 24.0
        v += a * dt + j * dt**2 / 2.0 + snap * dt**3 / 6.0
        a += j * dt + snap * dt**2 / 2.0
        j += snap * dt
        t += dt
        bounds.append(t)
        states.append((x, v, a, j))
    return np.asarray(bounds), states


def _eval_first_half(plan_: PlannedTrajectory, t: np.ndarray) -> np.ndarray:
    """Displacement magnitude at times ``t`` within ``[0, duration / 2]``."""
    segments = _half_segments(plan_)
    bounds, states = _segment_states(segments)
    t = np.minimum(t, bounds[-1])
    idx = np.clip(np.searchsorted(bounds, t, side="right") - 1, 0, len(segments) - 1)
    out = np.empty_like(t)
    for k, (dt, snap) in enumerate(segments):
        mask = idx == k
        if not np.any(mask):
            continue
        x0, v0, a0, j0 = states[k]
        tau = t[mask] - bounds[k]
        out[mask] = x0 + tau * (v0 + tau * (a0 / 2.0 + tau * (j0 / 6.0 + tau * snap / 24.0)))
    return out


def sample_on_grid(plan_: PlannedTrajectory, times: np.ndarray) -> np.ndarray:
    """Evaluate the plan on a uniform grid spanning its duration.

    The first half is evaluated from the closed-form phases; the second half
    is produced by point-reflecting those samples through the midpoint, which
    makes ``positions[k] + positions[n-1-k]`` exactly ``phi_0 + phi_1``.  The
    grid must be symmetric about its own midpoint and cover the plan duration
    up to rounding (synchronized joints share one grid this way).
    """
    n = len(times)
    total = plan_.phi_0 + plan_.phi_1
    if n == 1:
        return np.array([plan_.phi_0])
    half = (n - 1) // 2
    first = plan_.phi_0 + plan_.direction * _eval_first_half(plan_, times[: half + 1])
    positions = np.empty(n)
    positions[: half + 1] = first
    positions[n - 1 - half:] = total - first[::-1]
    if n % 2 == 1:
        positions[half] = 0.5 * total
    return positions


def sample(plan_: PlannedTrajectory, rate: float = DEFAULT_RATE_HZ) -> SampledTrajectory:
    """Sample a plan at ``rate`` points per second, endpoints included.

    A zero-duration plan yields a single sample at ``phi_0``.  The final
    sample is snapped to ``phi_1`` after checking it already lands within
    1e-3 rad of it.
    """
    if rate <= 0.0 or not math.isfinite(rate):
        raise ProfileInputError(f"rate must be finite and > 0, got {rate!r}")
    duration = plan_.duration
    n = int(math.floor(duration * rate * (1.0 + 1e-12))) + 1
    if duration == 0.0 or n < 2:
        return SampledTrajectory(rate=rate, duration=duration,
                                 positions=np.array([plan_.phi_0]))
    times = np.linspace(0.0, duration, n)
    positions = sample_on_grid(plan_, times)
    terminal_miss = abs(positions[-1] - plan_.phi_1)
    if terminal_miss > 1e-3:
        raise ProfileInputError(
            f"terminal sample misses target by {terminal_miss:.3e} rad; plan is inconsistent")
    positions[-1] = plan_.phi_1
    return SampledTrajectory(rate=rate, duration=duration, positions=positions)


def to_pwm(positions: np.ndarray, cal: ServoCalibration | None = None,
           clamp_tol_deg: float = 0.5) -> np.ndarray:
    """Convert joint angles (rad, relative to the servo neutral) to pulse widths.

    Angles beyond the calibrated range by more than ``clamp_tol_deg`` raise
    :class:`PulseRangeError` listing the offending indices; smaller excursions
    are clamped to the range.
    """
    if cal is None:
        cal = ServoCalibration()
    positions = np.asarray(positions, dtype=float)
    deg = cal.neutral_deg + np.degrees(positions)
    bad = (deg < cal.angle_min_deg - clamp_tol_deg) | (deg > cal.angle_max_deg + clamp_tol_deg)
    if np.any(bad):
        idx = np.flatnonzero(bad)
        raise PulseRangeError(
            idx, f"{idx.size} sample(s) outside the calibrated range "
                 f"[{cal.angle_min_deg}, {cal.angle_max_deg}] deg; first at index {idx[0]}")
    deg = np.clip(deg, cal.angle_min_deg, cal.angle_max_deg)
    scale = (cal.pulse_max_us - cal.pulse_min_us) / (cal.angle_max_deg - cal.angle_min_deg)
    return cal.pulse_min_us + (deg - cal.angle_min_deg) * scale


def write_csv(sampled: SampledTrajectory, stream, cal: ServoCalibration | None = None) -> None:
    """Write ``t_s,position_rad,pulse_us`` rows, %.6f fixed point, LF endings."""
    pulses = to_pwm(sampled.positions, cal)
    stream.write("t_s,position_rad,pulse_us\n")
    for t, x, p in zip(sampled.times, sampled.positions, pulses):
        stream.write(f"{t:.6f},{x:.6f},{p:.6f}\n")
