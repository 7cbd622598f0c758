/**
 * Orthographic stick-figure views of the robot (side x-z and top x-y),
 * drawn from the joints of the latest snapshot via the local leg FK.
 */

import { BODY_LENGTH, BODY_WIDTH, HIPS, LegPoints, legPointsFromJoints } from "./fk.js";

const LEG_COLORS: Record<string, string> = {
  fl: "#e5b454", fr: "#d4683e", hl: "#5b94c9", hr: "#5fc49a",
};

type Project = (p: [number, number, number]) => [number, number];

function drawView(ctx: CanvasRenderingContext2D, width: number, height: number,
                  legs: Record<string, LegPoints>, project: Project,
                  com: [number, number, number] | null): void {
  const scale = Math.min(width, height) / 0.6;
  const cx = width / 2;
  const cy = height / 2;
  const toPixel = (p: [number, number, number]): [number, number] => {
    const [u, v] = project(p);
    return [cx + u * scale, cy - v * scale];
  };

  ctx.clearRect(0, 0, width, height);

  // body outline between the hips
  ctx.strokeStyle = "#8892aa";
  ctx.lineWidth = 2;
  ctx.beginPath();
  const corners = ["fl", "fr", "hr", "hl"].map((leg) => toPixel(HIPS[leg]));
  corners.forEach(([px, py], i) => (i === 0 ? ctx.moveTo(px, py) : ctx.lineTo(px, py)));
  ctx.closePath();
  ctx.stroke();

  for (const [leg, points] of Object.entries(legs)) {
    ctx.strokeStyle = LEG_COLORS[leg];
    ctx.lineWidth = 2;
    ctx.beginPath();
    const [hx, hy] = toPixel(points.hip);
    const [kx, ky] = toPixel(points.knee);
    const [fx, fy] = toPixel(points.foot);
    ctx.moveTo(hx, hy);
    ctx.lineTo(kx, ky);
    ctx.lineTo(fx, fy);
    ctx.stroke();
    ctx.fillStyle = LEG_COLORS[leg];
    ctx.beginPath();
    ctx.arc(fx, fy, 3, 0, Math.PI * 2);
    ctx.fill();
  }

  if (com) {
    const [px, py] = toPixel(com);
    ctx.strokeStyle = "#ff5b66";
    ctx.beginPath();
    ctx.arc(px, py, 4, 0, Math.PI * 2);
    ctx.moveTo(px - 6, py);
    ctx.lineTo(px + 6, py);
    ctx.moveTo(px, py - 6);
    ctx.lineTo(px, py + 6);
    ctx.stroke();
  }
}

export function drawSideView(ctx: CanvasRenderingContext2D, width: number,
                             height: number, joints: Record<string, number>,
                             com: [number, number, number] | null): void {
  drawView(ctx, width, height, legPointsFromJoints(joints),
           (p) => [p[0], p[2]], com);
}

export function drawTopView(ctx: CanvasRenderingContext2D, width: number,
                            height: number, joints: Record<string, number>,
                            com: [number, number, number] | null): void {
  drawView(ctx, width, height, legPointsFromJoints(joints),
           (p) => [p[0], p[1]], com);
}
