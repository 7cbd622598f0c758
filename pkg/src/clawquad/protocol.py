"""Wire protocol for tele-operating the simulator.

Messages are newline-delimited JSON objects over a single duplex stream.
Every message carries ``type``, ``seq`` and ``t_ms``.  Commands are numbered
by the sender; the simulator answers each command with exactly one terminal
event (``trajectory_completed``, ``error``, or a ``state_snapshot`` for
``query``) whose ``reply_to`` field echoes the command's ``seq``.  Broadcast
events (periodic snapshots, stability warnings) have ``reply_to: null``.
Event ``seq`` numbers are the simulator's own monotone counter.

Scenario files reuse the command shape verbatim, one JSON object per line,
with ``t_ms`` read as the simulation tick at which to apply the command.

The JSON Schema documents shipped under ``clawquad/data/schema/`` are the
normative description of both message families.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Any


class ProtocolError(ValueError):
    """Malformed or semantically invalid incoming message."""

    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code


@dataclass(frozen=True)
class SetJointTarget:
    seq: int
    t_ms: int
    joint: str
    position_rad: float


@dataclass(frozen=True)
class SetLegTarget:
    seq: int
    t_ms: int
    leg: str
    target_m: tuple[float, float, float]


@dataclass(frozen=True)
class SetGripForce:
    seq: int
    t_ms: int
    dactylus: str
    force_n: float


@dataclass(frozen=True)
class BeginTransition:
    seq: int
    t_ms: int
    direction: str            # "to_dual" or "to_stance"


@dataclass(frozen=True)
class Query:
    seq: int
    t_ms: int


Command = SetJointTarget | SetLegTarget | SetGripForce | BeginTransition | Query

COMMAND_TYPES = {
    "set_joint_target": SetJointTarget,
    "set_leg_target": SetLegTarget,
    "set_grip_force": SetGripForce,
    "begin_transition": BeginTransition,
    "query": Query,
}

ERROR_CODES = (
    "malformed",
    "invalid_target",
    "joint_limit",
    "unreachable_target",
    "mode_violation",
    "actuation_limit",
    "preempted",
)


def _require(msg: dict, key: str, kinds, what: str):
    if key not in msg:
        raise ProtocolError("malformed", f"{what} is missing field {key!r}")
    value = msg[key]
    if not isinstance(value, kinds) or isinstance(value, bool):
        raise ProtocolError("malformed", f"field {key!r} has wrong type in {what}")
    return value


def parse_command(msg: dict) -> Command:
    """Validate a decoded JSON object and build the typed command."""
    if not isinstance(msg, dict):
        raise ProtocolError("malformed", "command is not a JSON object")
    mtype = _require(msg, "type", str, "command")
    if mtype not in COMMAND_TYPES:
        raise ProtocolError("malformed", f"unknown command type {mtype!r}")
    seq = _require(msg, "seq", int, mtype)
    t_ms = _require(msg, "t_ms", int, mtype)

    if mtype == "set_joint_target":
        return SetJointTarget(seq, t_ms,
                              _require(msg, "joint", str, mtype),
                              float(_require(msg, "position_rad", (int, float), mtype)))
    if mtype == "set_leg_target":
        raw = _require(msg, "target_m", list, mtype)
        if len(raw) != 3 or not all(isinstance(v, (int, float)) and not isinstance(v, bool)
                                    for v in raw):
            raise ProtocolError("malformed", "target_m must be a list of 3 numbers")
        return SetLegTarget(seq, t_ms, _require(msg, "leg", str, mtype),
                            tuple(float(v) for v in raw))
    if mtype == "set_grip_force":
        return SetGripForce(seq, t_ms, _require(msg, "dactylus", str, mtype),
                            float(_require(msg, "force_n", (int, float), mtype)))
    if mtype == "begin_transition":
        direction = _require(msg, "direction", str, mtype)
        if direction not in ("to_dual", "to_stance"):
            raise ProtocolError("malformed", f"unknown transition direction {direction!r}")
        return BeginTransition(seq, t_ms, direction)
    return Query(seq, t_ms)


def parse_command_line(line: str) -> Command:
    try:
        msg = json.loads(line)
    except json.JSONDecodeError as exc:
        raise ProtocolError("malformed", f"not valid JSON: {exc}") from exc
    return parse_command(msg)


def encode_command(cmd: Command) -> dict:
    """Inverse of :func:`parse_command`; used by scenario tooling and tests."""
    for name, cls in COMMAND_TYPES.items():
        if isinstance(cmd, cls):
            body: dict[str, Any] = {"type": name, "seq": cmd.seq, "t_ms": cmd.t_ms}
            break
    else:  # pragma: no cover - exhaustive by construction
        raise TypeError(f"not a command: {cmd!r}")
    if isinstance(cmd, SetJointTarget):
        body.update(joint=cmd.joint, position_rad=cmd.position_rad)
    elif isinstance(cmd, SetLegTarget):
        body.update(leg=cmd.leg, target_m=list(cmd.target_m))
    elif isinstance(cmd, SetGripForce):
        body.update(dactylus=cmd.dactylus, force_n=cmd.force_n)
    elif isinstance(cmd, BeginTransition):
        body.update(direction=cmd.direction)
    return body


def event(event_type: str, seq: int, t_ms: int, reply_to: int | None, **fields) -> dict:
    body = {"type": event_type, "seq": seq, "t_ms": t_ms, "reply_to": reply_to}
    body.update(fields)
    return body


def dump_message(msg: dict) -> str:
    """Canonical single-line serialization: sorted keys, no whitespace."""
    return json.dumps(msg, sort_keys=True, separators=(",", ":"))


def load_scenario(stream) -> list[Command]:
    """Read a scenario file: one command per line, ordered by ``t_ms``."""
    commands = []
    for lineno, line in enumerate(stream, start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        try:
            commands.append(parse_command_line(line))
        except ProtocolError as exc:
            raise ProtocolError("malformed", f"scenario line {lineno}: {exc}") from exc
    if any(b.t_ms < a.t_ms for a, b in zip(commands, commands[1:])):
        raise ProtocolError("malformed", "scenario t_ms values must be non-decreasing")
    return commands
