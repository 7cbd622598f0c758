/**
 * Live session against the simulator.
 *
 * Everything rendered comes from received snapshots and events; the console
 * never extrapolates robot state locally.  Each command is tracked from send
 * until its terminal event arrives and the pairing is kept by sequence
 * number, so every number on screen is traceable to a message.
 */

import {
  Command, CommandFactory, DactylusName, LegName, SimEvent, StateSnapshot,
  TransitionDirection, encodeCommand, parseEvent,
} from "./protocol.js";
import { Transport } from "./transport.js";

export type ConnectionState = "connecting" | "connected" | "retrying" | "closed";
export type CommandStatus = "pending" | "completed" | "error";

export interface CommandRecord {
  command: Command;
  status: CommandStatus;
  errorCode?: string;
  errorMessage?: string;
  terminalSeq?: number;     // event seq of the terminal, for traceability
}

export class RingBuffer {
  private data: { t: number; value: number }[] = [];

  constructor(readonly capacity: number) {}

  push(t: number, value: number): void {
    this.data.push({ t, value });
    if (this.data.length > this.capacity) this.data.shift();
  }

  points(): { t: number; value: number }[] {
    return this.data;
  }

  values(): number[] {
    return this.data.map((p) => p.value);
  }

  last(): { t: number; value: number } | undefined {
    return this.data[this.data.length - 1];
  }

  clear(): void {
    this.data = [];
  }
}

export interface SessionOptions {
  bufferCapacity?: number;
  reconnectDelayMs?: number;
  /** Injectable timer so tests can run without wall-clock waits. */
  schedule?: (fn: () => void, delayMs: number) => void;
}

export class Session {
  connection: ConnectionState = "connecting";
  latest: StateSnapshot | null = null;
  banner: string | null = null;
  history = new Map<number, CommandRecord>();
  warnings: number[] = [];

  positions = new Map<string, RingBuffer>();
  velocities = new Map<string, RingBuffer>();
  gripForces = new Map<string, RingBuffer>();
  margin: RingBuffer;

  onUpdate: () => void = () => {};

  private transport: Transport | null = null;
  private factory = new CommandFactory();
  private previousSnapshot: StateSnapshot | null = null;
  private userClosed = false;
  private readonly capacity: number;
  private readonly reconnectDelayMs: number;
  private readonly schedule: (fn: () => void, delayMs: number) => void;

  constructor(private readonly makeTransport: () => Transport,
              options: SessionOptions = {}) {
    this.capacity = options.bufferCapacity ?? 600;
    this.reconnectDelayMs = options.reconnectDelayMs ?? 1000;
    this.schedule = options.schedule ?? ((fn, delay) => setTimeout(fn, delay));
    this.margin = new RingBuffer(this.capacity);
  }

  connect(): void {
    this.connection = "connecting";
    this.previousSnapshot = null;   // velocity restarts cleanly after reconnect
    const transport = this.makeTransport();
    this.transport = transport;
    transport.onLine((line) => this.handleLine(line));
    transport.onClose(() => this.handleClose());
    // First snapshot on demand rather than waiting out a telemetry period.
    this.sendCommand(this.factory.query());
    this.onUpdate();
  }

  close(): void {
    this.userClosed = true;
    this.connection = "closed";
    this.transport?.close();
  }

  private handleClose(): void {
    if (this.userClosed) return;
    this.connection = "retrying";
    this.onUpdate();
    this.schedule(() => {
      if (!this.userClosed) this.connect();
    }, this.reconnectDelayMs);
  }

  private handleLine(line: string): void {
    let event: SimEvent;
    try {
      event = parseEvent(line);
    } catch (err) {
      this.banner = `unreadable server message: ${(err as Error).message}`;
      this.onUpdate();
      return;
    }
    this.connection = "connected";
    this.applyEvent(event);
    this.onUpdate();
  }

  private applyEvent(event: SimEvent): void {
    switch (event.type) {
      case "state_snapshot":
        this.applySnapshot(event);
        break;
      case "stability_warning":
        this.warnings.push(event.t_ms);
        break;
      case "trajectory_completed": {
        const record = this.history.get(event.reply_to);
        if (record) {
          record.status = "completed";
          record.terminalSeq = event.seq;
        }
        break;
      }
      case "error": {
        if (event.reply_to === null) break;
        const record = this.history.get(event.reply_to);
        if (record) {
          record.status = "error";
          record.errorCode = event.code;
          record.errorMessage = event.message;
          record.terminalSeq = event.seq;
        }
        break;
      }
      case "trajectory_started":
        break;     // the badge stays pending until the terminal event
    }
  }

  private applySnapshot(snapshot: StateSnapshot): void {
    if (snapshot.reply_to !== null) {
      const record = this.history.get(snapshot.reply_to);
      if (record && record.command.type === "query") {
        record.status = "completed";
        record.terminalSeq = snapshot.seq;
      }
    }
    const previous = this.previousSnapshot;
    for (const [joint, value] of Object.entries(snapshot.joints)) {
      this.buffer(this.positions, joint).push(snapshot.t_ms, value);
      if (previous && snapshot.t_ms > previous.t_ms) {
        const dt = (snapshot.t_ms - previous.t_ms) / 1000;
        const velocity = (value - previous.joints[joint]) / dt;
        this.buffer(this.velocities, joint).push(snapshot.t_ms, velocity);
      }
    }
    for (const [dact, force] of Object.entries(snapshot.grip_forces_n)) {
      this.buffer(this.gripForces, dact).push(snapshot.t_ms, force);
    }
    if (snapshot.margin_m !== null) {
      this.margin.push(snapshot.t_ms, snapshot.margin_m);
    }
    this.previousSnapshot = snapshot;
    this.latest = snapshot;
  }

  private buffer(map: Map<string, RingBuffer>, key: string): RingBuffer {
    let buf = map.get(key);
    if (!buf) {
      buf = new RingBuffer(this.capacity);
      map.set(key, buf);
    }
    return buf;
  }

  private sendCommand(command: Command): number {
    this.history.set(command.seq, { command, status: "pending" });
    if (this.history.size > 200) {
      const oldest = this.history.keys().next().value as number;
      this.history.delete(oldest);
    }
    this.transport?.send(encodeCommand(command));
    this.onUpdate();
    return command.seq;
  }

  // -- operator actions ------------------------------------------------------

  query(): number {
    return this.sendCommand(this.factory.query());
  }

  setJointTarget(joint: string, positionRad: number): number {
    return this.sendCommand(this.factory.setJointTarget(joint, positionRad));
  }

  setLegTarget(leg: LegName, target: [number, number, number]): number {
    return this.sendCommand(this.factory.setLegTarget(leg, target));
  }

  setGripForce(dactylus: DactylusName, forceN: number): number {
    return this.sendCommand(this.factory.setGripForce(dactylus, forceN));
  }

  beginTransition(direction: TransitionDirection): number {
    return this.sendCommand(this.factory.beginTransition(direction));
  }

  record(seq: number): CommandRecord | undefined {
    return this.history.get(seq);
  }
}
