"""Leg and claw kinematics, mass model, and static stability.

Conventions
-----------
Body frame: origin at the body-box centre, x forward, y left, z up.  Lengths
are metres, masses grams, angles radians (model files carry ranges in
degrees).  Leg joints are ``(coxa, femur, tibia)``; the coxa rolls the leg
plane about the body x axis and the femur/tibia pitch within that plane.  The
zero pose is the leg fully extended straight down from its hip, so positive
femur/tibia angles swing the links backward.

Legs are named ``fl, fr, hl, hr``; the front two carry a three-joint gripper
(wrist axial to the tibia, plus base and tip flexion) whose movable finger
closes against the rigid tibia tip.
"""

from __future__ import annotations

import importlib.resources
import math
from dataclasses import dataclass, field, fields, replace
from enum import Enum

import numpy as np

LEG_NAMES = ("fl", "fr", "hl", "hr")
DACTYLUS_LEGS = ("fl", "fr")


class ReachabilityError(ValueError):
    """Target outside the annulus a leg can reach."""


class JointRangeError(ValueError):
    """Joint value outside its calibrated range."""


class StanceError(ValueError):
    """Contact set unusable for a support polygon."""


class ModelError(ValueError):
    """Malformed robot model file."""


@dataclass(frozen=True)
class LegModel:
    femur_length: float = 0.100           # m
    tibia_length: float = 0.100           # m
    coxa_range_deg: float = 200.0
    femur_range_deg: float = 300.0
    tibia_range_deg: float = 300.0
    mass_plain_g: float = 190.2
    mass_dactylus_g: float = 244.1

    def __post_init__(self):
        if self.femur_length <= 0 or self.tibia_length <= 0:
            raise ModelError("link lengths must be positive")

    @property
    def reach(self) -> float:
        return self.femur_length + self.tibia_length

    def joint_ranges(self):
        """Symmetric (lo, hi) per joint in radians."""
        return tuple((-math.radians(r) / 2.0, math.radians(r) / 2.0)
                     for r in (self.coxa_range_deg, self.femur_range_deg, self.tibia_range_deg))


@dataclass(frozen=True)
class DactylusModel:
    """Three-DoF gripper: axial wrist plus base and tip flexion.

    Link lengths are scaled from the exploded-view proportions and are
    configurable; the closed pose is the finger folded flush along the tibia
    tip, which defines zero aperture.
    """

    base_link: float = 0.030               # m
    tip_link: float = 0.025                # m
    wrist_range_deg: float = 200.0         # symmetric about zero
    base_flexion_deg: float = 55.0         # 0 = open, max = closed
    tip_flexion_deg: float = 35.0          # base + tip <= 90 keeps closing monotone

    def joint_ranges(self):
        w = math.radians(self.wrist_range_deg) / 2.0
        return ((-w, w),
                (0.0, math.radians(self.base_flexion_deg)),
                (0.0, math.radians(self.tip_flexion_deg)))


@dataclass(frozen=True)
class BodyModel:
    length: float = 0.253                  # m
    width: float = 0.118
    height: float = 0.056
    mass_g: float = 613.0
    hip_inset: float = 0.015               # hips sit at body corners, inset this much

    def hip_offsets(self) -> dict[str, np.ndarray]:
        hx = self.length / 2.0 - self.hip_inset
        hy = self.width / 2.0 - self.hip_inset
        return {
            "fl": np.array([hx, hy, 0.0]),
            "fr": np.array([hx, -hy, 0.0]),
            "hl": np.array([-hx, hy, 0.0]),
            "hr": np.array([-hx, -hy, 0.0]),
        }


@dataclass(frozen=True)
class RobotModel:
    """Whole-robot mass/geometry model; defaults reproduce the shipped robot."""

    body: BodyModel = field(default_factory=BodyModel)
    leg: LegModel = field(default_factory=LegModel)
    dactylus: DactylusModel = field(default_factory=DactylusModel)
    total_mass_g: float = 1481.6
    moi_sagittal_plain: float = 5.39e5     # g mm^2, about the femur motor axis
    moi_sagittal_dactylus: float = 8.89e5
    moi_coronal_plain: float = 7.99e5      # g mm^2, about the coxa motor axis
    moi_coronal_dactylus: float = 1.21e6
    femur_mass_fraction_plain: float = 0.5
    femur_mass_fraction_dactylus: float = 0.4
    # Spiral springs are allowed up to this fraction of their yield stress;
    # recorded for configuration only, nothing downstream consumes it.
    spring_stress_factor: float = 0.65

    def leg_mass_g(self, leg: str) -> float:
        return self.leg.mass_dactylus_g if leg in DACTYLUS_LEGS else self.leg.mass_plain_g

    def mass_identity_error_g(self) -> float:
        """|declared total - body - 2 plain legs - 2 gripper legs| in grams."""
        derived = (self.body.mass_g + 2.0 * self.leg.mass_plain_g
                   + 2.0 * self.leg.mass_dactylus_g)
        return abs(self.total_mass_g - derived)


DEFAULT_MODEL = RobotModel()


class ContactKind(Enum):
    NONE = "none"
    FOOT = "foot"       # point contact at the foot
    TIBIA = "tibia"     # shin segment (knee to foot) on the ground


@dataclass(frozen=True)
class StanceConfig:
    """Which legs touch the ground and with what, plus the leg joints."""

    contacts: dict[str, ContactKind]
    joints: dict[str, tuple[float, float, float]]


def _rot_x(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def _check_ranges(q, model: LegModel):
    names = ("coxa", "femur", "tibia")
    for value, (lo, hi), name in zip(q, model.joint_ranges(), names):
        if not lo - 1e-12 <= value <= hi + 1e-12:
            raise JointRangeError(
                f"{name} = {value:.4f} rad outside [{lo:.4f}, {hi:.4f}]")


def fk_leg_points(q, model: LegModel | None = None, hip=None):
    """Hip, knee and foot positions in the body frame."""
    model = model or DEFAULT_MODEL.leg
    _check_ranges(q, model)
    coxa, femur, tibia = q
    hip = np.zeros(3) if hip is None else np.asarray(hip, dtype=float)
    rx = _rot_x(coxa)
    lf, lt = model.femur_length, model.tibia_length
    femur_dir = np.array([-math.sin(femur), 0.0, -math.cos(femur)])
    shin_angle = femur + tibia
    tibia_dir = np.array([-math.sin(shin_angle), 0.0, -math.cos(shin_angle)])
    knee = hip + rx @ (lf * femur_dir)
    foot = knee + rx @ (lt * tibia_dir)
    return hip, knee, foot


def fk_leg(q, model: LegModel | None = None, hip=None) -> np.ndarray:
    """Foot position in the body frame for joints ``(coxa, femur, tibia)``."""
    return fk_leg_points(q, model, hip)[2]


def ik_leg(target, model: LegModel | None = None, hip=None):
    """Joints ``(coxa, femur, tibia)`` placing the foot at ``target``.

    Selects the knee-backward branch (the shin folds away from the reach
    direction, animal fashion).  Raises :class:`ReachabilityError` outside
    the reachable annulus and :class:`JointRangeError` if the solution
    violates joint limits.
    """
    model = model or DEFAULT_MODEL.leg
    hip = np.zeros(3) if hip is None else np.asarray(hip, dtype=float)
    d = np.asarray(target, dtype=float) - hip
    lf, lt = model.femur_length, model.tibia_length

    r = float(np.linalg.norm(d))
    if r > model.reach + 1e-12:
        raise ReachabilityError(
            f"target {r:.4f} m from hip exceeds reach {model.reach:.4f} m")
    if r < abs(lf - lt) - 1e-12 or r == 0.0:
        raise ReachabilityError(
            f"target {r:.4f} m from hip is inside the inner workspace boundary")

    coxa = math.atan2(d[1], -d[2])
    rho = math.hypot(d[1], d[2])

    cos_t = (r * r - lf * lf - lt * lt) / (2.0 * lf * lt)
    cos_t = min(1.0, max(-1.0, cos_t))
    beta = math.acos(cos_t)
    mu = math.atan2(-d[0], rho)
    alpha = math.atan2(lt * math.sin(beta), lf + lt * math.cos(beta))
    q = (coxa, mu + alpha, -beta)
    _check_ranges(q, model)
    return q


def dactylus_aperture(q_d, model: DactylusModel | None = None):
    """Fingertip position (claw frame) and opening distance.

    ``q_d`` is ``(wrist, base, tip)``.  The claw frame has x along the tibia
    axis toward its tip and the flexion plane rotated about x by the wrist
    angle.  Aperture is the distance between the fingertip and the point it
    touches at full flexion, so a fully closed claw reads exactly zero and
    the value decreases monotonically as base and tip flex.
    """
    model = model or DEFAULT_MODEL.dactylus
    wrist, base, tip = q_d
    names = ("wrist", "base", "tip")
    for value, (lo, hi), name in zip(q_d, model.joint_ranges(), names):
        if not lo - 1e-12 <= value <= hi + 1e-12:
            raise JointRangeError(
                f"dactylus {name} = {value:.4f} rad outside [{lo:.4f}, {hi:.4f}]")

    base_max = math.radians(model.base_flexion_deg)
    tip_max = math.radians(model.tip_flexion_deg)
    psi1 = base_max - base                      # link angle above the tibia line
    psi2 = psi1 + (tip_max - tip)
    fx = model.base_link * math.cos(psi1) + model.tip_link * math.cos(psi2)
    fy = model.base_link * math.sin(psi1) + model.tip_link * math.sin(psi2)
    closed = model.base_link + model.tip_link   # fingertip at full flexion
    aperture = math.hypot(fx - closed, fy)
    fingertip = np.array([fx, fy * math.cos(wrist), fy * math.sin(wrist)])
    return fingertip, aperture


def center_of_mass(joints: dict[str, tuple[float, float, float]],
                   model: RobotModel | None = None) -> np.ndarray:
    """Mass-weighted body-frame centre of mass.

    The body mass sits at the body centroid; each leg's mass is split
    between the femur midpoint and the shin midpoint (the gripper legs are
    shin-heavy, matching where their extra inertia lives).
    """
    model = model or DEFAULT_MODEL
    hips = model.body.hip_offsets()
    total = model.body.mass_g
    moment = model.body.mass_g * np.zeros(3)
    for leg in LEG_NAMES:
        hip, knee, foot = fk_leg_points(joints[leg], model.leg, hips[leg])
        mass = model.leg_mass_g(leg)
        f_frac = (model.femur_mass_fraction_dactylus if leg in DACTYLUS_LEGS
                  else model.femur_mass_fraction_plain)
        femur_mid = 0.5 * (hip + knee)
        shin_mid = 0.5 * (knee + foot)
        moment = moment + mass * (f_frac * femur_mid + (1.0 - f_frac) * shin_mid)
        total += mass
    return moment / total


def _convex_hull_2d(points: np.ndarray) -> np.ndarray:
    """Andrew's monotone chain; returns hull vertices in CCW order."""
    pts = sorted({(float(p[0]), float(p[1])) for p in points})
    if len(pts) <= 2:
        return np.asarray(pts)

    def half(seq):
        out = []
        for p in seq:
            while len(out) >= 2:
                ox, oy = out[-2]
                ax, ay = out[-1]
                if (ax - ox) * (p[1] - oy) - (ay - oy) * (p[0] - ox) <= 0:
                    out.pop()
                else:
                    break
            out.append(p)
        return out

    lower = half(pts)
    upper = half(reversed(pts))
    return np.asarray(lower[:-1] + upper[:-1])


def _point_segment_distance(p, a, b) -> float:
    ab = b - a
    denom = float(ab @ ab)
    if denom == 0.0:
        return float(np.linalg.norm(p - a))
    t = min(1.0, max(0.0, float((p - a) @ ab) / denom))
    return float(np.linalg.norm(p - (a + t * ab)))


def contact_points(stance: StanceConfig, model: RobotModel | None = None) -> np.ndarray:
    """Body-frame 3-D points contributing to the support polygon.

    A shin contact is discretized as its two endpoints; the hull of the
    endpoints equals the hull of the segments.
    """
    model = model or DEFAULT_MODEL
    hips = model.body.hip_offsets()
    pts = []
    for leg, kind in stance.contacts.items():
        if kind is ContactKind.NONE:
            continue
        _, knee, foot = fk_leg_points(stance.joints[leg], model.leg, hips[leg])
        if kind is ContactKind.FOOT:
            pts.append(foot)
        else:
            pts.extend((knee, foot))
    return np.asarray(pts)


def stability_margin(stance: StanceConfig, com, model: RobotModel | None = None) -> float:
    """Signed distance from the projected CoM to the support polygon boundary.

    Positive inside the polygon.  Requires at least two contact primitives;
    degenerate (collinear) support yields a non-positive margin.
    """
    n_primitives = sum(1 for k in stance.contacts.values() if k is not ContactKind.NONE)
    if n_primitives == 0:
        raise StanceError("empty contact set")
    if n_primitives < 2:
        raise StanceError("support polygon needs at least two contact primitives")
    pts = contact_points(stance, model)[:, :2]
    p = np.asarray(com, dtype=float)[:2]

    hull = _convex_hull_2d(pts)
    if len(hull) == 1:
        return -float(np.linalg.norm(p - hull[0]))
    if len(hull) == 2:
        return -_point_segment_distance(p, hull[0], hull[1])

    edge_dist = []
    inside = True
    for i in range(len(hull)):
        a, b = hull[i], hull[(i + 1) % len(hull)]
        cross = (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0])
        if cross < 0.0:
            inside = False
        edge_dist.append(_point_segment_distance(p, a, b))
    margin = min(edge_dist)
    return margin if inside else -margin


@dataclass(frozen=True)
class MoiReport:
    sagittal_plain: float
    sagittal_dactylus: float
    coronal_plain: float
    coronal_dactylus: float

    @property
    def sagittal_increase(self) -> float:
        return self.sagittal_dactylus / self.sagittal_plain - 1.0

    @property
    def coronal_increase(self) -> float:
        return self.coronal_dactylus / self.coronal_plain - 1.0

    @property
    def mean_increase(self) -> float:
        return 0.5 * (self.sagittal_increase + self.coronal_increase)


def moi_report(model: RobotModel | None = None) -> MoiReport:
    """Leg moments of inertia with and without the gripper, plus the increases."""
    model = model or DEFAULT_MODEL
    return MoiReport(
        sagittal_plain=model.moi_sagittal_plain,
        sagittal_dactylus=model.moi_sagittal_dactylus,
        coronal_plain=model.moi_coronal_plain,
        coronal_dactylus=model.moi_coronal_dactylus,
    )


# --- model file I/O ---------------------------------------------------------
#
# One plain-text key-value document per robot: "key = value" lines, '#'
# comments.  Lengths in metres, masses in grams, ranges in degrees, moments
# of inertia in g mm^2.

_MODEL_KEYS = {
    "body_length_m": ("body", "length"),
    "body_width_m": ("body", "width"),
    "body_height_m": ("body", "height"),
    "body_mass_g": ("body", "mass_g"),
    "hip_inset_m": ("body", "hip_inset"),
    "femur_length_m": ("leg", "femur_length"),
    "tibia_length_m": ("leg", "tibia_length"),
    "coxa_range_deg": ("leg", "coxa_range_deg"),
    "femur_range_deg": ("leg", "femur_range_deg"),
    "tibia_range_deg": ("leg", "tibia_range_deg"),
    "leg_mass_plain_g": ("leg", "mass_plain_g"),
    "leg_mass_dactylus_g": ("leg", "mass_dactylus_g"),
    "dactylus_base_link_m": ("dactylus", "base_link"),
    "dactylus_tip_link_m": ("dactylus", "tip_link"),
    "dactylus_wrist_range_deg": ("dactylus", "wrist_range_deg"),
    "dactylus_base_flexion_deg": ("dactylus", "base_flexion_deg"),
    "dactylus_tip_flexion_deg": ("dactylus", "tip_flexion_deg"),
    "total_mass_g": (None, "total_mass_g"),
    "moi_sagittal_plain_gmm2": (None, "moi_sagittal_plain"),
    "moi_sagittal_dactylus_gmm2": (None, "moi_sagittal_dactylus"),
    "moi_coronal_plain_gmm2": (None, "moi_coronal_plain"),
    "moi_coronal_dactylus_gmm2": (None, "moi_coronal_dactylus"),
    "femur_mass_fraction_plain": (None, "femur_mass_fraction_plain"),
    "femur_mass_fraction_dactylus": (None, "femur_mass_fraction_dactylus"),
    "spring_stress_factor": (None, "spring_stress_factor"),
}


def parse_model(text: str) -> RobotModel:
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ModelError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, _, val = line.partition("=")
        key = key.strip()
        if key not in _MODEL_KEYS:
            raise ModelError(f"line {lineno}: unknown key {key!r}")
        try:
            values[key] = float(val.strip())
        except ValueError as exc:
            raise ModelError(f"line {lineno}: bad number for {key!r}") from exc

    body_kwargs, leg_kwargs, dact_kwargs, top_kwargs = {}, {}, {}, {}
    for key, value in values.items():
        section, attr = _MODEL_KEYS[key]
        {"body": body_kwargs, "leg": leg_kwargs, "dactylus": dact_kwargs,
         None: top_kwargs}[section][attr] = value
    return RobotModel(body=BodyModel(**body_kwargs), leg=LegModel(**leg_kwargs),
                      dactylus=DactylusModel(**dact_kwargs), **top_kwargs)


def format_model(model: RobotModel) -> str:
    lines = ["# clawquad robot model: lengths m, masses g, ranges deg, MoI g mm^2"]
    for key, (section, attr) in _MODEL_KEYS.items():
        source = model if section is None else getattr(model, section)
        lines.append(f"{key} = {getattr(source, attr):g}")
    return "\n".join(lines) + "\n"


def load_model(path) -> RobotModel:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_model(fh.read())


def default_model_text() -> str:
    return importlib.resources.files("clawquad.data").joinpath(
        "default_robot.model").read_text(encoding="utf-8")
