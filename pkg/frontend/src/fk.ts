/**
 * Leg forward kinematics for the stick-figure views.
 *
 * Mirrors the simulator's conventions: body frame x forward / y left / z up,
 * hips inset at the body corners, coxa rolling the leg plane about x,
 * femur and tibia pitching within it, zero pose pointing straight down.
 * Geometry constants match the shipped robot model.
 */

export type Vec3 = [number, number, number];

export const FEMUR_LENGTH = 0.1;
export const TIBIA_LENGTH = 0.1;
export const BODY_LENGTH = 0.253;
export const BODY_WIDTH = 0.118;
const HIP_INSET = 0.015;

const HX = BODY_LENGTH / 2 - HIP_INSET;
const HY = BODY_WIDTH / 2 - HIP_INSET;

export const HIPS: Record<string, Vec3> = {
  fl: [HX, HY, 0],
  fr: [HX, -HY, 0],
  hl: [-HX, HY, 0],
  hr: [-HX, -HY, 0],
};

export interface LegPoints {
  hip: Vec3;
  knee: Vec3;
  foot: Vec3;
}

function rotX(angle: number, v: Vec3): Vec3 {
  const c = Math.cos(angle);
  const s = Math.sin(angle);
  return [v[0], c * v[1] - s * v[2], s * v[1] + c * v[2]];
}

function add(a: Vec3, b: Vec3): Vec3 {
  return [a[0] + b[0], a[1] + b[1], a[2] + b[2]];
}

export function fkLeg(coxa: number, femur: number, tibia: number,
                      hip: Vec3): LegPoints {
  const femurDir: Vec3 = [-Math.sin(femur), 0, -Math.cos(femur)];
  const shin = femur + tibia;
  const tibiaDir: Vec3 = [-Math.sin(shin), 0, -Math.cos(shin)];
  const knee = add(hip, rotX(coxa, [
    FEMUR_LENGTH * femurDir[0], 0, FEMUR_LENGTH * femurDir[2]]));
  const foot = add(knee, rotX(coxa, [
    TIBIA_LENGTH * tibiaDir[0], 0, TIBIA_LENGTH * tibiaDir[2]]));
  return { hip, knee, foot };
}

export function legPointsFromJoints(joints: Record<string, number>):
    Record<string, LegPoints> {
  const out: Record<string, LegPoints> = {};
  for (const leg of Object.keys(HIPS)) {
    out[leg] = fkLeg(joints[`${leg}_coxa`], joints[`${leg}_femur`],
                     joints[`${leg}_tibia`], HIPS[leg]);
  }
  return out;
}
