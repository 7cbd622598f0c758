"""Tick-driven whole-robot simulator behind the tele-operation protocol.

The simulator advances in fixed 1 ms ticks.  Each tick it steps every active
trajectory cursor by one sample, runs the grip-force regulators, re-derives
ground contacts, centre of mass and stability margin, and emits events.
Commands are applied between ticks in arrival order, so a given initial state
and command log always produce the same state trace.

The world model is deliberately kinematic: the body frame stays level and the
ground is the horizontal plane the feet start on.  A leg point at or below
that plane (within a tolerance) counts as a contact; penetration is a
tolerated artifact of joint-space interpolation, standing in for the ground
reaction the real robot would feel.  Quasi-static stability is judged from
the convex hull of the contact projections, which is exactly the check the
transition script is validated against.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from . import kinematics as kin
from . import protocol, tendon
from .profile import MotionLimits, plan, sample
from .sync import plan_synchronized, sample_synchronized

TICK_MS = 1
TICK_S = 1e-3

LEG_JOINTS = ("coxa", "femur", "tibia")
DACT_JOINTS = ("wrist", "base", "tip")
JOINT_NAMES = tuple(f"{leg}_{j}" for leg in kin.LEG_NAMES for j in LEG_JOINTS) + \
    tuple(f"{leg}_dact_{j}" for leg in kin.DACTYLUS_LEGS for j in DACT_JOINTS)

# Standing crouch: feet directly under the hips, low enough that the hind
# shins can fold flat onto the footprint plane during the mode transition.
HOME_LEG_POSE = (0.0, math.radians(67.5), math.radians(-135.0))


class Mode(Enum):
    STANCE = "stance"
    SINGLE_LEG_MANIP = "single_leg_manip"
    DUAL_LEG_MANIP = "dual_leg_manip"
    TRANSITIONING = "transitioning"


@dataclass(frozen=True)
class TransitionScript:
    """Three keyframes walking the robot between stance and shin-supported
    dual-leg manipulation, each held for a dwell after it is reached."""

    keyframes: tuple[dict[str, float], dict[str, float], dict[str, float]]
    dwell_s: tuple[float, float, float] = (0.2, 0.2, 0.2)

    def __post_init__(self):
        if len(self.keyframes) != 3:
            raise ValueError("a transition script has exactly 3 keyframes")


def _pose(legs: dict[str, tuple[float, float, float]],
          dact: dict[str, tuple[float, float, float]] | None = None) -> dict[str, float]:
    out = {}
    for leg, q in legs.items():
        for name, value in zip(LEG_JOINTS, q):
            out[f"{leg}_{name}"] = value
    for leg in kin.DACTYLUS_LEGS:
        q = (dact or {}).get(leg, (0.0, 0.0, 0.0))
        for name, value in zip(DACT_JOINTS, q):
            out[f"{leg}_dact_{name}"] = value
    return out


def home_pose() -> dict[str, float]:
    return _pose({leg: HOME_LEG_POSE for leg in kin.LEG_NAMES})


def default_transition_script() -> TransitionScript:
    """Shipped stance-to-dual script.

    Stage 1 folds the hind legs until the shins lie flat on the footprint
    plane (the foothold on the hind tibiae).  Stage 2 folds the front legs
    up over the back, moving the centre of mass onto the shin rectangle
    before the front feet stop carrying weight.  Stage 3 brings the grippers
    down in front of the chest into the working posture.  The kneel keeps
    the shins on the ground plane throughout (the body frame stays level, so
    body height is fixed by the support), and the numbers are tuned so the
    stability margin stays positive at every tick of both directions.
    """
    d = math.radians
    kneel = (0.0, d(-40.0), d(-50.0))
    stage1 = _pose({
        "fl": HOME_LEG_POSE, "fr": HOME_LEG_POSE,
        "hl": kneel, "hr": kneel,
    })
    stage2 = _pose({
        "fl": (0.0, d(120.0), d(-110.0)), "fr": (0.0, d(120.0), d(-110.0)),
        "hl": kneel, "hr": kneel,
    })
    stage3 = _pose({
        "fl": (0.0, d(100.0), d(-145.0)), "fr": (0.0, d(100.0), d(-145.0)),
        "hl": kneel, "hr": kneel,
    })
    return TransitionScript((stage1, stage2, stage3))


@dataclass(frozen=True)
class GraspableObject:
    object_id: str
    size_m: float            # aperture at which the finger meets the object
    hold_force_n: float      # minimum closing force that counts as holding


@dataclass(frozen=True)
class Grasp:
    object_id: str
    aperture_m: float
    force_n: float


@dataclass(frozen=True)
class SimConfig:
    limits: MotionLimits = field(default_factory=MotionLimits)
    model: kin.RobotModel = field(default_factory=lambda: kin.DEFAULT_MODEL)
    script: TransitionScript = field(default_factory=default_transition_script)
    telemetry_divisor: int = 20          # snapshot every N ticks when serving
    contact_tol_m: float = 0.02
    margin_warn_m: float = 0.003
    margin_hysteresis_m: float = 0.002
    grip_slew_rad_s: float = 2.0
    tendon_joint: tendon.TendonJoint = field(default_factory=tendon.monofilament_tendon)
    objects: dict[str, GraspableObject] = field(default_factory=dict)


@dataclass(frozen=True)
class RobotState:
    """Immutable view of the simulated robot at one tick."""

    clock_ms: int
    mode: Mode
    joints: dict[str, float]
    contacts: dict[str, kin.ContactKind]
    grasps: dict[str, Grasp | None]
    com_m: tuple[float, float, float]
    margin_m: float | None
    transition_stage: int | None
    grip_forces_n: dict[str, float]


@dataclass
class _Active:
    positions: np.ndarray
    cursor: int
    group: int


@dataclass
class _Group:
    seq: int
    joints: set[str]
    pending: set[str]
    transition: bool = False


@dataclass
class _TransitionRun:
    seq: int
    direction: str
    stages: list[dict[str, float]]
    dwells: list[int]
    stage_idx: int = -1
    dwell_left: int = 0
    waiting_group: int | None = None
    moved: set[str] = field(default_factory=set)


@dataclass
class _GripRun:
    seq: int | None
    target_n: float
    state: tendon.TendonJoint
    settled: bool = False


class Simulator:
    """Single-writer event loop core; see the module docstring for the model."""

    def __init__(self, config: SimConfig | None = None):
        self.config = config or SimConfig()
        self.model = self.config.model
        self.clock_ms = 0
        self.joints: dict[str, float] = home_pose()
        self._actives: dict[str, _Active] = {}
        self._groups: dict[int, _Group] = {}
        self._next_group = 1
        self._event_seq = 0
        self._transition: _TransitionRun | None = None
        self._dual = False
        self._pre_transition: dict[str, float] | None = None
        self._grips: dict[str, _GripRun] = {
            leg: _GripRun(None, 0.0, self.config.tendon_joint, settled=True)
            for leg in kin.DACTYLUS_LEGS
        }
        self.grasps: dict[str, Grasp | None] = {leg: None for leg in kin.DACTYLUS_LEGS}
        self._warned = False
        self._hips = self.model.body.hip_offsets()
        self.ground_z = min(
            kin.fk_leg_points(self._leg_q(leg), self.model.leg, self._hips[leg])[2][2]
            for leg in kin.LEG_NAMES)
        self._contacts = self._derive_contacts()

    # -- small accessors ----------------------------------------------------

    def _leg_q(self, leg: str):
        return tuple(self.joints[f"{leg}_{j}"] for j in LEG_JOINTS)

    def _dact_q(self, leg: str):
        return tuple(self.joints[f"{leg}_dact_{j}"] for j in DACT_JOINTS)

    def _joint_range(self, name: str):
        leg, _, rest = name.partition("_")
        if rest.startswith("dact_"):
            idx = DACT_JOINTS.index(rest.removeprefix("dact_"))
            return self.model.dactylus.joint_ranges()[idx]
        idx = LEG_JOINTS.index(rest)
        return self.model.leg.joint_ranges()[idx]

    def _next_event_seq(self) -> int:
        self._event_seq += 1
        return self._event_seq

    def _event(self, etype: str, reply_to: int | None, **fields) -> dict:
        return protocol.event(etype, self._next_event_seq(), self.clock_ms,
                              reply_to, **fields)

    # -- derived state ------------------------------------------------------

    def _derive_contacts(self) -> dict[str, kin.ContactKind]:
        tol = self.config.contact_tol_m
        contacts = {}
        for leg in kin.LEG_NAMES:
            _, knee, foot = kin.fk_leg_points(self._leg_q(leg), self.model.leg,
                                              self._hips[leg])
            knee_down = knee[2] <= self.ground_z + tol
            foot_down = foot[2] <= self.ground_z + tol
            if knee_down:
                contacts[leg] = kin.ContactKind.TIBIA
            elif foot_down:
                contacts[leg] = kin.ContactKind.FOOT
            else:
                contacts[leg] = kin.ContactKind.NONE
        return contacts

    def _stance(self) -> kin.StanceConfig:
        return kin.StanceConfig(self._contacts,
                                {leg: self._leg_q(leg) for leg in kin.LEG_NAMES})

    def _margin(self, com) -> float | None:
        stance = self._stance()
        try:
            return kin.stability_margin(stance, com, self.model)
        except kin.StanceError:
            return None

    @property
    def mode(self) -> Mode:
        if self._transition is not None:
            return Mode.TRANSITIONING
        if self._dual:
            return Mode.DUAL_LEG_MANIP
        if all(k is not kin.ContactKind.NONE for k in self._contacts.values()):
            return Mode.STANCE
        return Mode.SINGLE_LEG_MANIP

    def state(self) -> RobotState:
        com = kin.center_of_mass({leg: self._leg_q(leg) for leg in kin.LEG_NAMES},
                                 self.model)
        margin = self._margin(com)
        stage = None
        if self._transition is not None and self._transition.stage_idx >= 0:
            stage = self._transition.stage_idx + 1
        return RobotState(
            clock_ms=self.clock_ms,
            mode=self.mode,
            joints=dict(self.joints),
            contacts=dict(self._contacts),
            grasps=dict(self.grasps),
            com_m=(float(com[0]), float(com[1]), float(com[2])),
            margin_m=margin,
            transition_stage=stage,
            grip_forces_n={leg: tendon.joint_force(run.state)
                           for leg, run in self._grips.items()},
        )

    def snapshot(self, reply_to: int | None = None) -> dict:
        s = self.state()
        return self._event(
            "state_snapshot", reply_to,
            mode=s.mode.value,
            joints={k: s.joints[k] for k in JOINT_NAMES},
            contacts={leg: kind.value for leg, kind in sorted(s.contacts.items())},
            grasps={leg: (None if g is None else
                          {"object_id": g.object_id, "aperture_m": g.aperture_m,
                           "force_n": g.force_n})
                    for leg, g in sorted(s.grasps.items())},
            com_m=list(s.com_m),
            margin_m=s.margin_m,
            transition_stage=s.transition_stage,
            grip_forces_n={leg: f for leg, f in sorted(s.grip_forces_n.items())},
        )

    # -- trajectory bookkeeping ----------------------------------------------

    def _cancel_groups_touching(self, joints: set[str], events: list) -> None:
        doomed = {a.group for j, a in self._actives.items() if j in joints}
        for gid in sorted(doomed):
            group = self._groups.pop(gid)
            for j in list(self._actives):
                if self._actives[j].group == gid:
                    del self._actives[j]
            events.append(self._event(
                "error", group.seq, code="preempted",
                message="superseded by a newer command on the same joints"))

    def _start_group(self, seq: int, targets: dict[str, float],
                     events: list, transition: bool = False) -> int | None:
        """Plan a synchronized move of ``targets`` from the current positions.

        Returns the group id, or ``None`` when nothing has to move (the
        terminal event is emitted immediately unless this is a script stage).
        """
        names = [n for n in JOINT_NAMES if n in targets]
        self._cancel_groups_touching(set(names), events)
        start = [self.joints[n] for n in names]
        goal = [targets[n] for n in names]
        sync = plan_synchronized(start, goal, self.config.limits)
        _, rows = sample_synchronized(sync, 1000.0)
        gid = self._next_group
        moving = {}
        for i, name in enumerate(names):
            if rows.shape[1] > 1 and abs(goal[i] - start[i]) > 0.0:
                moving[name] = rows[i]
        if not moving:
            if not transition:
                events.append(self._event("trajectory_completed", seq, joints=names))
            return None
        self._next_group += 1
        self._groups[gid] = _Group(seq=seq, joints=set(moving), pending=set(moving),
                                   transition=transition)
        for name, row in moving.items():
            self._actives[name] = _Active(positions=row, cursor=0, group=gid)
        events.append(self._event(
            "trajectory_started", seq, joints=sorted(moving),
            duration_ms=int(rows.shape[1] - 1)))
        return gid

    # -- command handling ----------------------------------------------------

    def execute_command(self, cmd: protocol.Command) -> list[dict]:
        """Apply one command at the current tick boundary."""
        events: list[dict] = []
        if isinstance(cmd, protocol.Query):
            events.append(self.snapshot(reply_to=cmd.seq))
            return events

        if isinstance(cmd, protocol.SetJointTarget):
            if cmd.joint not in JOINT_NAMES:
                events.append(self._event("error", cmd.seq, code="invalid_target",
                                          message=f"unknown joint {cmd.joint!r}"))
                return events
            if self._transition is not None:
                events.append(self._event("error", cmd.seq, code="mode_violation",
                                          message="joints are script-driven during a transition"))
                return events
            lo, hi = self._joint_range(cmd.joint)
            if not lo <= cmd.position_rad <= hi:
                events.append(self._event(
                    "error", cmd.seq, code="joint_limit",
                    message=f"{cmd.joint} target {cmd.position_rad:.4f} rad outside "
                            f"[{lo:.4f}, {hi:.4f}]"))
                return events
            self._start_group(cmd.seq, {cmd.joint: cmd.position_rad}, events)
            return events

        if isinstance(cmd, protocol.SetLegTarget):
            if cmd.leg not in kin.LEG_NAMES:
                events.append(self._event("error", cmd.seq, code="invalid_target",
                                          message=f"unknown leg {cmd.leg!r}"))
                return events
            if self._transition is not None:
                events.append(self._event("error", cmd.seq, code="mode_violation",
                                          message="legs are script-driven during a transition"))
                return events
            try:
                q = kin.ik_leg(cmd.target_m, self.model.leg, self._hips[cmd.leg])
            except kin.ReachabilityError as exc:
                events.append(self._event("error", cmd.seq, code="unreachable_target",
                                          message=str(exc)))
                return events
            except kin.JointRangeError as exc:
                events.append(self._event("error", cmd.seq, code="joint_limit",
                                          message=str(exc)))
                return events
            targets = {f"{cmd.leg}_{n}": v for n, v in zip(LEG_JOINTS, q)}
            self._start_group(cmd.seq, targets, events)
            return events

        if isinstance(cmd, protocol.SetGripForce):
            if cmd.dactylus not in kin.DACTYLUS_LEGS:
                events.append(self._event(
                    "error", cmd.seq, code="invalid_target",
                    message=f"no dactylus on leg {cmd.dactylus!r}; grippers ride the front legs"))
                return events
            run = self._grips[cmd.dactylus]
            try:
                tendon.servo_angle_for_force(cmd.force_n, run.state)
            except tendon.ActuationLimitError as exc:
                events.append(self._event(
                    "error", cmd.seq, code="actuation_limit", message=str(exc),
                    achievable_force_n=exc.achievable_force))
                return events
            if run.seq is not None and not run.settled:
                events.append(self._event(
                    "error", run.seq, code="preempted",
                    message="superseded by a newer grip-force command"))
            self._grips[cmd.dactylus] = _GripRun(cmd.seq, cmd.force_n, run.state)
            events.append(self._event("trajectory_started", cmd.seq,
                                      joints=[f"{cmd.dactylus}_grip"], duration_ms=None))
            return events

        if isinstance(cmd, protocol.BeginTransition):
            return self._begin_transition(cmd)

        raise TypeError(f"unhandled command {cmd!r}")  # pragma: no cover

    def _begin_transition(self, cmd: protocol.BeginTransition) -> list[dict]:
        events: list[dict] = []
        if self._transition is not None:
            events.append(self._event("error", cmd.seq, code="mode_violation",
                                      message="a transition is already running"))
            return events
        if cmd.direction == "to_dual":
            if self.mode is not Mode.STANCE:
                events.append(self._event(
                    "error", cmd.seq, code="mode_violation",
                    message=f"transition to dual-leg manipulation requires stance, "
                            f"not {self.mode.value}"))
                return events
            self._pre_transition = dict(self.joints)
            stages = list(self.config.script.keyframes)
        else:
            if self.mode is not Mode.DUAL_LEG_MANIP:
                events.append(self._event(
                    "error", cmd.seq, code="mode_violation",
                    message="transition back requires dual-leg manipulation mode"))
                return events
            k1, k2, _ = self.config.script.keyframes
            restore = self._pre_transition or home_pose()
            stages = [k2, k1, restore]
        dwells = [max(1, round(d / TICK_S)) for d in self.config.script.dwell_s]
        self._cancel_groups_touching(set(JOINT_NAMES), events)
        self._transition = _TransitionRun(seq=cmd.seq, direction=cmd.direction,
                                          stages=stages, dwells=dwells)
        self._advance_transition(events)
        return events

    def _advance_transition(self, events: list) -> None:
        run = self._transition
        assert run is not None
        run.stage_idx += 1
        if run.stage_idx >= len(run.stages):
            moved = sorted(run.moved)
            self._transition = None
            if run.direction == "to_dual":
                entered = self._enter_dual(events, run.seq)
                if not entered:
                    return
            else:
                self._dual = False
                self._pre_transition = None
            events.append(self._event("trajectory_completed", run.seq, joints=moved))
            return
        run.dwell_left = run.dwells[run.stage_idx]
        targets = run.stages[run.stage_idx]
        run.moved |= {n for n in targets if abs(targets[n] - self.joints[n]) > 0.0}
        run.waiting_group = self._start_group(run.seq, targets, events, transition=True)

    def _enter_dual(self, events: list, seq: int) -> bool:
        hind_ok = all(self._contacts[leg] is kin.ContactKind.TIBIA for leg in ("hl", "hr"))
        com = kin.center_of_mass({leg: self._leg_q(leg) for leg in kin.LEG_NAMES},
                                 self.model)
        margin = self._margin(com)
        if not hind_ok or margin is None or margin < 0.0:
            events.append(self._event(
                "error", seq, code="mode_violation",
                message="transition finished without stable hind-shin support"))
            return False
        self._dual = True
        return True

    # -- the tick ------------------------------------------------------------

    def tick(self) -> list[dict]:
        """Advance one millisecond; returns the events this tick produced."""
        events: list[dict] = []
        self.clock_ms += TICK_MS

        finished_groups = []
        for name in list(self._actives):
            active = self._actives[name]
            active.cursor += 1
            self.joints[name] = float(active.positions[active.cursor])
            if active.cursor == len(active.positions) - 1:
                del self._actives[name]
                group = self._groups[active.group]
                group.pending.discard(name)
                if not group.pending:
                    finished_groups.append(active.group)
        for gid in finished_groups:
            group = self._groups.pop(gid)
            if not group.transition:
                events.append(self._event("trajectory_completed", group.seq,
                                          joints=sorted(group.joints)))

        # Transition staging: wait for the stage's motion, then dwell.
        run = self._transition
        if run is not None and run.stage_idx >= 0:
            group_done = run.waiting_group is None or run.waiting_group in finished_groups \
                or run.waiting_group not in self._groups
            if group_done:
                if run.dwell_left > 0:
                    run.dwell_left -= 1
                else:
                    self._advance_transition(events)

        # Grip regulators: one slew-limited step per tick, then grasp update.
        for leg, grip in self._grips.items():
            if not grip.settled:
                try:
                    goal = tendon.servo_angle_for_force(grip.target_n, grip.state)
                except tendon.ActuationLimitError as exc:
                    events.append(self._event(
                        "error", grip.seq, code="actuation_limit", message=str(exc),
                        achievable_force_n=exc.achievable_force))
                    grip.settled = True
                    continue
                grip.state = tendon.grip_step(grip.state, grip.target_n, TICK_S,
                                              self.config.grip_slew_rad_s)
                if abs(grip.state.alpha_1 - goal) <= 1e-12:
                    grip.settled = True
                    if grip.seq is not None:
                        events.append(self._event(
                            "trajectory_completed", grip.seq,
                            joints=[f"{leg}_grip"]))
            self._update_grasp(leg, grip)

        self._contacts = self._derive_contacts()
        self._check_stability(events)
        return events

    def _update_grasp(self, leg: str, grip: _GripRun) -> None:
        obj = self.config.objects.get(leg)
        if obj is None:
            self.grasps[leg] = None
            return
        _, aperture = kin.dactylus_aperture(self._dact_q(leg), self.model.dactylus)
        force = tendon.joint_force(grip.state)
        if aperture <= obj.size_m and force >= obj.hold_force_n:
            self.grasps[leg] = Grasp(obj.object_id, aperture, force)
        else:
            self.grasps[leg] = None

    def _check_stability(self, events: list) -> None:
        com = kin.center_of_mass({leg: self._leg_q(leg) for leg in kin.LEG_NAMES},
                                 self.model)
        margin = self._margin(com)
        if margin is None:
            return
        if margin < self.config.margin_warn_m and not self._warned:
            self._warned = True
            events.append(self._event("stability_warning", None, margin_m=margin))
        elif margin >= self.config.margin_warn_m + self.config.margin_hysteresis_m:
            self._warned = False

    # -- headless driving ----------------------------------------------------

    def run_ticks(self, n: int) -> list[dict]:
        events = []
        for _ in range(n):
            events.extend(self.tick())
        return events

    @property
    def idle(self) -> bool:
        return (not self._actives and self._transition is None
                and all(g.settled for g in self._grips.values()))
