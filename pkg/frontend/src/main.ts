/**
 * Console wiring: one Session drives the whole page; every control sends a
 * protocol command and shows its terminal badge inline, and every readout is
 * taken from the latest snapshot.
 */

import { drawChart } from "./charts.js";
import { drawSideView, drawTopView } from "./figure.js";
import { fkLeg, HIPS, Vec3 } from "./fk.js";
import { DactylusName, LegName } from "./protocol.js";
import { Session } from "./session.js";
import { WebSocketTransport } from "./transport.js";

const LEG_JOINT_RANGES: Array<[string, number, number]> = [
  ["coxa", -1.745, 1.745],
  ["femur", -2.618, 2.618],
  ["tibia", -2.618, 2.618],
];
const DACT_JOINT_RANGES: Array<[string, number, number]> = [
  ["dact_wrist", -1.745, 1.745],
  ["dact_base", 0.0, 0.9599],
  ["dact_tip", 0.0, 0.6109],
];
const LEGS: LegName[] = ["fl", "fr", "hl", "hr"];
const NUDGE_M = 0.01;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

let session: Session | null = null;
const badgeSeqs: Array<{ seq: number; label: string }> = [];

function sendTracked(label: string, send: (s: Session) => number): void {
  if (!session) return;
  const seq = send(session);
  badgeSeqs.unshift({ seq, label });
  if (badgeSeqs.length > 12) badgeSeqs.pop();
}

function buildJointControls(): void {
  const host = el<HTMLDivElement>("joints");
  host.innerHTML = "";
  for (const leg of LEGS) {
    const ranges = leg === "fl" || leg === "fr"
      ? [...LEG_JOINT_RANGES, ...DACT_JOINT_RANGES]
      : LEG_JOINT_RANGES;
    const group = document.createElement("fieldset");
    group.innerHTML = `<legend>${leg.toUpperCase()}</legend>`;
    for (const [suffix, lo, hi] of ranges) {
      const joint = `${leg}_${suffix}`;
      const row = document.createElement("label");
      row.className = "slider-row";
      const slider = document.createElement("input");
      slider.type = "range";
      slider.min = String(lo);
      slider.max = String(hi);
      slider.step = "0.005";
      slider.dataset.joint = joint;
      slider.addEventListener("change", () => {
        sendTracked(`${joint} -> ${Number(slider.value).toFixed(2)}`,
                    (s) => s.setJointTarget(joint, Number(slider.value)));
      });
      const caption = document.createElement("span");
      caption.textContent = suffix;
      const value = document.createElement("code");
      value.dataset.jointValue = joint;
      row.append(caption, slider, value);
      group.append(row);
    }
    host.append(group);
  }
}

function nudge(leg: LegName, axis: 0 | 1 | 2, sign: 1 | -1): void {
  if (!session?.latest) return;
  const joints = session.latest.joints;
  const points = fkLeg(joints[`${leg}_coxa`], joints[`${leg}_femur`],
                       joints[`${leg}_tibia`], HIPS[leg]);
  const target = [...points.foot] as Vec3;
  target[axis] += sign * NUDGE_M;
  sendTracked(`${leg} nudge ${"xyz"[axis]}${sign > 0 ? "+" : "-"}`,
              (s) => s.setLegTarget(leg, target));
}

function buildNudgePad(): void {
  const host = el<HTMLDivElement>("nudge");
  host.innerHTML = "";
  const legSelect = document.createElement("select");
  for (const leg of LEGS) {
    const option = document.createElement("option");
    option.value = leg;
    option.textContent = leg.toUpperCase();
    legSelect.append(option);
  }
  host.append(legSelect);
  const axes: Array<[string, 0 | 1 | 2, 1 | -1]> = [
    ["x+", 0, 1], ["x-", 0, -1], ["y+", 1, 1], ["y-", 1, -1],
    ["z+", 2, 1], ["z-", 2, -1],
  ];
  for (const [label, axis, sign] of axes) {
    const button = document.createElement("button");
    button.textContent = label;
    button.addEventListener("click", () =>
      nudge(legSelect.value as LegName, axis, sign));
    host.append(button);
  }
}

function buildGripDials(): void {
  const host = el<HTMLDivElement>("grips");
  host.innerHTML = "";
  for (const dact of ["fl", "fr"] as DactylusName[]) {
    const row = document.createElement("label");
    row.className = "slider-row";
    const dial = document.createElement("input");
    dial.type = "range";
    dial.min = "0";
    dial.max = "2";
    dial.step = "0.05";
    dial.value = "0";
    dial.addEventListener("change", () => {
      sendTracked(`${dact} grip ${dial.value} N`,
                  (s) => s.setGripForce(dact, Number(dial.value)));
    });
    const caption = document.createElement("span");
    caption.textContent = `${dact} force`;
    row.append(caption, dial);
    host.append(row);
  }
}

function render(): void {
  if (!session) return;
  const pill = el<HTMLSpanElement>("connection");
  pill.textContent = session.connection;
  pill.dataset.state = session.connection;

  const banner = el<HTMLDivElement>("banner");
  banner.textContent = session.banner ?? "";
  banner.hidden = session.banner === null;

  const snapshot = session.latest;
  const mode = el<HTMLSpanElement>("mode");
  if (snapshot) {
    mode.textContent = snapshot.transition_stage === null
      ? snapshot.mode
      : `${snapshot.mode} (stage ${snapshot.transition_stage}/3)`;
    el<HTMLSpanElement>("clock").textContent = `${(snapshot.t_ms / 1000).toFixed(2)} s`;
    el<HTMLSpanElement>("margin").textContent =
      snapshot.margin_m === null ? "n/a" : `${(snapshot.margin_m * 1000).toFixed(1)} mm`;
    for (const node of document.querySelectorAll<HTMLElement>("code[data-joint-value]")) {
      const joint = node.dataset.jointValue as string;
      node.textContent = snapshot.joints[joint]?.toFixed(3) ?? "";
    }
  }

  const history = el<HTMLUListElement>("history");
  history.innerHTML = "";
  for (const { seq, label } of badgeSeqs) {
    const record = session.record(seq);
    if (!record) continue;
    const item = document.createElement("li");
    const badge = record.status === "pending" ? "…"
      : record.status === "completed" ? "ok" : `err:${record.errorCode}`;
    item.textContent = `#${seq} ${label}`;
    const status = document.createElement("span");
    status.className = `badge ${record.status}`;
    status.title = record.errorMessage ?? "";
    status.textContent = badge;
    item.append(status);
    history.append(item);
  }

  const jointSelect = el<HTMLSelectElement>("chart-joint");
  const joint = jointSelect.value || "fl_femur";
  const posCanvas = el<HTMLCanvasElement>("chart-pos");
  const velCanvas = el<HTMLCanvasElement>("chart-vel");
  const gripCanvas = el<HTMLCanvasElement>("chart-grip");
  const marginCanvas = el<HTMLCanvasElement>("chart-margin");
  const pos = session.positions.get(joint);
  const vel = session.velocities.get(joint);
  drawChart(posCanvas.getContext("2d")!, posCanvas.width, posCanvas.height,
            pos ? [{ label: `${joint} rad`, color: "#e5b454", points: pos.points() }] : []);
  drawChart(velCanvas.getContext("2d")!, velCanvas.width, velCanvas.height,
            vel ? [{ label: `${joint} rad/s`, color: "#5fc49a", points: vel.points() }] : []);
  drawChart(gripCanvas.getContext("2d")!, gripCanvas.width, gripCanvas.height,
            ["fl", "fr"].map((d, i) => ({
              label: `${d} N`,
              color: i === 0 ? "#e5b454" : "#d4683e",
              points: session!.gripForces.get(d)?.points() ?? [],
            })));
  drawChart(marginCanvas.getContext("2d")!, marginCanvas.width, marginCanvas.height,
            [{ label: "margin m", color: "#5b94c9", points: session.margin.points() }],
            { warnBelow: 0.003 });

  if (snapshot) {
    const side = el<HTMLCanvasElement>("view-side");
    const top = el<HTMLCanvasElement>("view-top");
    drawSideView(side.getContext("2d")!, side.width, side.height,
                 snapshot.joints, snapshot.com_m);
    drawTopView(top.getContext("2d")!, top.width, top.height,
                snapshot.joints, snapshot.com_m);
  }
}

function populateChartJointSelect(): void {
  const select = el<HTMLSelectElement>("chart-joint");
  select.innerHTML = "";
  for (const leg of LEGS) {
    for (const [suffix] of LEG_JOINT_RANGES) {
      const option = document.createElement("option");
      option.value = `${leg}_${suffix}`;
      option.textContent = `${leg}_${suffix}`;
      select.append(option);
    }
  }
  select.value = "fl_femur";
}

function connect(): void {
  session?.close();
  const url = el<HTMLInputElement>("address").value;
  session = new Session(() => new WebSocketTransport(url));
  session.onUpdate = render;
  session.connect();
}

function boot(): void {
  buildJointControls();
  buildNudgePad();
  buildGripDials();
  populateChartJointSelect();
  el<HTMLButtonElement>("connect").addEventListener("click", connect);
  el<HTMLButtonElement>("to-dual").addEventListener("click", () =>
    sendTracked("transition to dual", (s) => s.beginTransition("to_dual")));
  el<HTMLButtonElement>("to-stance").addEventListener("click", () =>
    sendTracked("transition to stance", (s) => s.beginTransition("to_stance")));
  el<HTMLButtonElement>("query").addEventListener("click", () =>
    sendTracked("query", (s) => s.query()));
  el<HTMLSelectElement>("chart-joint").addEventListener("change", render);
}

boot();
