/**
 * End-to-end: the console session drives the real simulator service over the
 * wire and the assertions run on what came back in telemetry.
 *
 * The velocity-plateau check runs the service with a 1.0 rad/s speed bound:
 * under the stock servo bound no within-range joint move is long enough to
 * cruise, so a lower bound is configured through the service's environment
 * override, exactly as a CI rig would.
 */

import * as fs from "node:fs";
import * as path from "node:path";
import { afterEach, beforeEach, describe, expect, it } from "vitest";

import { Session } from "../src/session.js";
import { isSmoothedTrapezoid } from "../src/shape.js";
import { SchemaValidator } from "../src/validator.js";
import { RunningService, startService } from "./service.js";
import { TcpTransport } from "./tcp_transport.js";

const commandSchema = new SchemaValidator(JSON.parse(fs.readFileSync(
  path.resolve(__dirname, "../../src/clawquad/data/schema/command.schema.json"),
  "utf-8")));

function connectSession(port: number): { session: Session; transport: TcpTransport } {
  let transport!: TcpTransport;
  const session = new Session(() => {
    transport = new TcpTransport("127.0.0.1", port);
    return transport;
  }, { reconnectDelayMs: 200 });
  session.connect();
  return { session, transport };
}

function until(session: Session, predicate: () => boolean,
               timeoutMs: number, what: string): Promise<void> {
  return new Promise((resolve, reject) => {
    const prior = session.onUpdate;
    const timer = setTimeout(() => {
      session.onUpdate = prior;
      reject(new Error(`timed out waiting for ${what}`));
    }, timeoutMs);
    const check = () => {
      prior();
      if (predicate()) {
        clearTimeout(timer);
        session.onUpdate = prior;
        resolve();
      }
    };
    session.onUpdate = check;
    check();
  });
}

describe("console against the live service", () => {
  let service: RunningService;
  let session: Session;
  let transport: TcpTransport;

  afterEach(() => {
    session?.close();
    service?.stop();
  });

  describe("with a cruise-friendly speed bound", () => {
    beforeEach(async () => {
      service = await startService({ CLAWQUAD_VMAX: "1.0" });
      ({ session, transport } = connectSession(service.port));
    });

    it("connects, moves a joint, sees completion, and the speed trace is a smoothed trapezoid", async () => {
      const connectedAt = Date.now();
      await until(session, () => session.latest !== null, 2000, "first snapshot");
      expect(Date.now() - connectedAt).toBeLessThan(500);

      const from = session.latest!.joints.fl_femur;
      const seq = session.setJointTarget("fl_femur", from - 2.0);
      await until(session, () => session.record(seq)?.status === "completed",
                  15000, "trajectory completion");

      expect(session.latest!.joints.fl_femur).toBeCloseTo(from - 2.0, 6);
      const speeds = session.velocities.get("fl_femur")!.values();
      expect(speeds.length).toBeGreaterThan(50);
      const peak = Math.max(...speeds.map(Math.abs));
      expect(peak).toBeLessThanOrEqual(1.0 * 1.02);
      expect(peak).toBeGreaterThan(0.9);
      expect(isSmoothedTrapezoid(speeds)).toBe(true);
    });

    it("a command to the current position completes immediately", async () => {
      await until(session, () => session.latest !== null, 2000, "first snapshot");
      const seq = session.setJointTarget("fl_femur", session.latest!.joints.fl_femur);
      await until(session, () => session.record(seq)?.status === "completed",
                  2000, "immediate completion");
    });

    it("an out-of-reach nudge shows an error badge with its code", async () => {
      await until(session, () => session.latest !== null, 2000, "first snapshot");
      const seq = session.setLegTarget("fr", [0.5, 0.0, 0.0]);
      await until(session, () => session.record(seq)?.status === "error",
                  2000, "error badge");
      expect(session.record(seq)!.errorCode).toBe("unreachable_target");
    });

    it("the grip force trace converges to the dialed target", async () => {
      await until(session, () => session.latest !== null, 2000, "first snapshot");
      const seq = session.setGripForce("fl", 0.4);
      await until(session, () => session.record(seq)?.status === "completed",
                  5000, "grip completion");
      await until(session,
                  () => Math.abs((session.latest?.grip_forces_n.fl ?? 0) - 0.4) < 1e-6,
                  2000, "grip telemetry");
      const trace = session.gripForces.get("fl")!.values();
      expect(trace[trace.length - 1]).toBeCloseTo(0.4, 6);
    });

    it("every message the console sent validates against the golden schema", async () => {
      await until(session, () => session.latest !== null, 2000, "first snapshot");
      session.setJointTarget("fr_tibia", -2.0);
      session.setGripForce("fl", 0.4);
      session.beginTransition("to_stance");   // rejected, but must still be valid JSON
      session.query();
      await new Promise((r) => setTimeout(r, 300));
      expect(transport.sent.length).toBeGreaterThanOrEqual(5);
      for (const line of transport.sent) {
        expect(commandSchema.validate(JSON.parse(line))).toEqual([]);
      }
    });
  });

  describe("with stock limits", () => {
    beforeEach(async () => {
      service = await startService();
      ({ session, transport } = connectSession(service.port));
    });

    it("the transition button walks the mode through all three keyframes", async () => {
      await until(session, () => session.latest !== null, 2000, "first snapshot");
      const stages = new Set<number>();
      session.onUpdate = () => {
        const stage = session.latest?.transition_stage;
        if (stage !== null && stage !== undefined) stages.add(stage);
      };
      const seq = session.beginTransition("to_dual");
      await until(session, () => session.record(seq)?.status === "completed",
                  30000, "transition completion");
      // the mode change lands with the next telemetry snapshot
      await until(session, () => session.latest?.mode === "dual_leg_manip",
                  2000, "dual mode snapshot");
      expect([...stages].sort()).toEqual([1, 2, 3]);
      expect(session.latest!.contacts.hl).toBe("tibia");
      expect(session.latest!.margin_m).toBeGreaterThanOrEqual(0);
    }, 40000);
  });
});
