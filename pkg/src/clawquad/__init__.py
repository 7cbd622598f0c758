"""Motion control and kinematic simulation for a claw-legged quadruped.

The package covers the full desk-scale control stack: jerk-limited
single-joint profiles, multi-joint time synchronization, leg and gripper
kinematics with static stability checking, the tendon compliance model used
for grip-force regulation, and a tick-driven simulator served over a
newline-JSON tele-operation protocol.
"""

from .kinematics import (BodyModel, ContactKind, DactylusModel, LegModel, RobotModel,
                         StanceConfig, center_of_mass, dactylus_aperture, fk_leg,
                         fk_leg_points, ik_leg, moi_report, stability_margin)
from .profile import (MotionLimits, PlannedTrajectory, SampledTrajectory,
                      ServoCalibration, TrajectoryType, classify, plan, sample, to_pwm)
from .sim import Mode, SimConfig, Simulator, TransitionScript
from .sync import SyncPlan, plan_synchronized, sample_synchronized
from .tendon import TendonJoint, grip_step, joint_force, servo_angle_for_force

__version__ = "0.1.0"
