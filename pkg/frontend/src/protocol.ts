/**
 * Wire types for the simulator's tele-operation protocol.
 *
 * Messages are newline-delimited JSON on a duplex stream.  The console
 * numbers its commands with a local sequence counter; the simulator answers
 * each command with exactly one terminal event whose `reply_to` echoes that
 * number.  Broadcast events (periodic snapshots, stability warnings) carry
 * `reply_to: null`.  The JSON Schema documents shipped with the simulator
 * package are normative; these types mirror them.
 */

export type LegName = "fl" | "fr" | "hl" | "hr";
export type DactylusName = "fl" | "fr";
export type TransitionDirection = "to_dual" | "to_stance";
export type RobotMode = "stance" | "single_leg_manip" | "dual_leg_manip" | "transitioning";
export type ContactKind = "none" | "foot" | "tibia";

export interface CommandBase {
  type: string;
  seq: number;
  t_ms: number;
}

export interface SetJointTarget extends CommandBase {
  type: "set_joint_target";
  joint: string;
  position_rad: number;
}

export interface SetLegTarget extends CommandBase {
  type: "set_leg_target";
  leg: LegName;
  target_m: [number, number, number];
}

export interface SetGripForce extends CommandBase {
  type: "set_grip_force";
  dactylus: DactylusName;
  force_n: number;
}

export interface BeginTransition extends CommandBase {
  type: "begin_transition";
  direction: TransitionDirection;
}

export interface Query extends CommandBase {
  type: "query";
}

export type Command = SetJointTarget | SetLegTarget | SetGripForce | BeginTransition | Query;

export interface Grasp {
  object_id: string;
  aperture_m: number;
  force_n: number;
}

export interface StateSnapshot {
  type: "state_snapshot";
  seq: number;
  t_ms: number;
  reply_to: number | null;
  mode: RobotMode;
  joints: Record<string, number>;
  contacts: Record<string, ContactKind>;
  grasps: Record<string, Grasp | null>;
  com_m: [number, number, number];
  margin_m: number | null;
  transition_stage: number | null;
  grip_forces_n: Record<string, number>;
}

export interface TrajectoryStarted {
  type: "trajectory_started";
  seq: number;
  t_ms: number;
  reply_to: number;
  joints: string[];
  duration_ms: number | null;
}

export interface TrajectoryCompleted {
  type: "trajectory_completed";
  seq: number;
  t_ms: number;
  reply_to: number;
  joints: string[];
}

export interface StabilityWarning {
  type: "stability_warning";
  seq: number;
  t_ms: number;
  reply_to: null;
  margin_m: number;
}

export interface ErrorEvent {
  type: "error";
  seq: number;
  t_ms: number;
  reply_to: number | null;
  code: string;
  message: string;
  achievable_force_n?: number;
}

export type SimEvent =
  | StateSnapshot
  | TrajectoryStarted
  | TrajectoryCompleted
  | StabilityWarning
  | ErrorEvent;

const EVENT_TYPES = new Set([
  "state_snapshot", "trajectory_started", "trajectory_completed",
  "stability_warning", "error",
]);

/** Parse one incoming line; throws on anything that is not a known event. */
export function parseEvent(line: string): SimEvent {
  let raw: unknown;
  try {
    raw = JSON.parse(line);
  } catch {
    throw new Error(`not JSON: ${line.slice(0, 80)}`);
  }
  if (typeof raw !== "object" || raw === null || Array.isArray(raw)) {
    throw new Error("event is not an object");
  }
  const msg = raw as Record<string, unknown>;
  if (typeof msg.type !== "string" || !EVENT_TYPES.has(msg.type)) {
    throw new Error(`unknown event type: ${String(msg.type)}`);
  }
  if (typeof msg.seq !== "number" || typeof msg.t_ms !== "number") {
    throw new Error("event is missing seq/t_ms");
  }
  return msg as unknown as SimEvent;
}

/** Allocates command sequence numbers and stamps the envelope fields. */
export class CommandFactory {
  private next = 1;

  private stamp(): { seq: number; t_ms: number } {
    return { seq: this.next++, t_ms: 0 };
  }

  setJointTarget(joint: string, positionRad: number): SetJointTarget {
    return { type: "set_joint_target", ...this.stamp(), joint, position_rad: positionRad };
  }

  setLegTarget(leg: LegName, target: [number, number, number]): SetLegTarget {
    return { type: "set_leg_target", ...this.stamp(), leg, target_m: target };
  }

  setGripForce(dactylus: DactylusName, forceN: number): SetGripForce {
    return { type: "set_grip_force", ...this.stamp(), dactylus, force_n: forceN };
  }

  beginTransition(direction: TransitionDirection): BeginTransition {
    return { type: "begin_transition", ...this.stamp(), direction };
  }

  query(): Query {
    return { type: "query", ...this.stamp() };
  }
}

export function encodeCommand(cmd: Command): string {
  return JSON.stringify(cmd);
}
