"""Cable/winch/spiral-spring compliance of a gripper joint.

The servo winds a tendon of stiffness ``k_t`` onto a winch of radius ``r_1``;
the joint side unwinds from a winch of radius ``r_2`` against a return spring
of stiffness ``k_s`` referred to that winch.  With ``alpha_1`` and ``alpha_2``
the angular deviations measured at the servo and at the joint encoder, the
reaction force pressing the finger onto a held object is

    N = k_t * (r_1 * alpha_1 - r_2 * alpha_2) - k_s * r_2 * alpha_2

Both stiffnesses are effective linear stiffnesses at the winch tangents
(N/m), so the elongation term is in metres and ``N`` is a force in newtons.
A cable cannot push: by default the tendon tension term is clamped at zero
when the elongation goes negative (disable with ``slack_clamp=False`` when an
unclamped affine model is wanted, e.g. for verification).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace


class ActuationLimitError(ValueError):
    """Requested force needs a servo angle outside its range.

    Carries the nearest achievable servo angle and the force it produces.
    """

    def __init__(self, message, clamped_alpha_1, achievable_force):
        super().__init__(message)
        self.clamped_alpha_1 = clamped_alpha_1
        self.achievable_force = achievable_force


@dataclass(frozen=True)
class TendonJoint:
    k_t: float = 20000.0        # tendon stiffness at the winch tangent, N/m
    k_s: float = 250.0          # return-spring stiffness referred to the joint winch, N/m
    r_1: float = 0.005          # servo winch radius, m
    r_2: float = 0.005          # joint winch radius, m
    alpha_1: float = 0.0        # servo angular deviation, rad
    alpha_2: float = 0.0        # joint encoder angular deviation, rad
    alpha_1_min: float = -math.pi / 2
    alpha_1_max: float = math.pi / 2
    slack_clamp: bool = True

    def __post_init__(self):
        for name in ("k_t", "k_s", "r_1", "r_2"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be positive")
        for name in ("alpha_1", "alpha_2"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")


def braided_tendon(**overrides) -> TendonJoint:
    """Stiff braided-line rig: position fidelity, little force resolution."""
    return TendonJoint(k_t=60000.0, k_s=250.0, **overrides)


def monofilament_tendon(**overrides) -> TendonJoint:
    """Compliant monofilament rig: soft enough to regulate grip force."""
    return TendonJoint(k_t=4000.0, k_s=250.0, **overrides)


def joint_force(joint: TendonJoint) -> float:
    """Reaction force on the held object, N.  Positive closes the grip."""
    tension = joint.k_t * (joint.r_1 * joint.alpha_1 - joint.r_2 * joint.alpha_2)
    if joint.slack_clamp and tension < 0.0:
        tension = 0.0
    return tension - joint.k_s * joint.r_2 * joint.alpha_2


def servo_angle_for_force(target: float, joint: TendonJoint) -> float:
    """Servo deviation producing ``target`` newtons at the current joint deviation.

    Exact linear inversion of :func:`joint_force`; with the slack clamp on, a
    target that would need the cable to push (negative tension) is reported as
    an actuation limit, as is an angle outside the servo range.
    """
    alpha_1 = (target + (joint.k_t + joint.k_s) * joint.r_2 * joint.alpha_2) \
        / (joint.k_t * joint.r_1)
    required_tension = target + joint.k_s * joint.r_2 * joint.alpha_2
    if joint.slack_clamp and required_tension < 0.0:
        # Slack cable: force saturates at the pure spring pull, whatever alpha_1.
        achievable = -joint.k_s * joint.r_2 * joint.alpha_2
        raise ActuationLimitError(
            f"force {target:.4f} N needs a pushing cable; nearest achievable "
            f"is {achievable:.4f} N", alpha_1, achievable)
    if not joint.alpha_1_min <= alpha_1 <= joint.alpha_1_max:
        clamped = min(joint.alpha_1_max, max(joint.alpha_1_min, alpha_1))
        achievable = joint_force(replace(joint, alpha_1=clamped))
        raise ActuationLimitError(
            f"servo angle {alpha_1:.4f} rad outside "
            f"[{joint.alpha_1_min:.4f}, {joint.alpha_1_max:.4f}]; nearest "
            f"achievable force is {achievable:.4f} N", clamped, achievable)
    return alpha_1


def grip_step(joint: TendonJoint, target: float, dt: float, slew: float) -> TendonJoint:
    """Advance the servo one tick toward the target force, slew-rate limited.

    Moves ``alpha_1`` by at most ``slew * dt`` toward the exact inversion, so
    repeated stepping converges monotonically while ``alpha_2`` is held.
    """
    if slew <= 0.0 or dt <= 0.0:
        raise ValueError("slew and dt must be positive")
    goal = servo_angle_for_force(target, joint)
    step = max(-slew * dt, min(slew * dt, goal - joint.alpha_1))
    return replace(joint, alpha_1=joint.alpha_1 + step)
