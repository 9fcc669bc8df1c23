/**
 * Pure derivation of everything the canvas draws from one state message.
 * Keeping this free of DOM makes the geometry unit-testable.
 */

import type { StateMessage, StabilityFlags } from "./protocol.js";

export interface Camera {
  /** world meters -> canvas pixels */
  scale: number;
  centerX: number; // world x at canvas center
  centerZ: number; // world z at canvas center
  width: number;
  height: number;
}

export interface Point2 {
  x: number;
  y: number;
}

/** Rotate the body-frame +x axis into the world by quaternion [w,x,y,z]. */
export function bodyAxisWorld(q: [number, number, number, number]): [number, number, number] {
  const [w, x, y, z] = q;
  // R * (1,0,0): first column of the rotation matrix
  return [1 - 2 * (y * y + z * z), 2 * (x * y + w * z), 2 * (x * z - w * y)];
}

/** Heading azimuth (deg) in the beta convention: R_y(h) applied to +X. */
export function headingDeg(q: [number, number, number, number]): number {
  const a = bodyAxisWorld(q);
  return (Math.atan2(-a[2], a[0]) * 180) / Math.PI;
}

/** World (x, z) -> canvas pixels; +z (robot right at heading 0) draws downward. */
export function worldToScreen(cam: Camera, wx: number, wz: number): Point2 {
  return {
    x: cam.width / 2 + (wx - cam.centerX) * cam.scale,
    y: cam.height / 2 + (wz - cam.centerZ) * cam.scale,
  };
}

export interface RobotGlyph {
  outline: Point2[]; // triangle pointing along the heading
  anchorDot: Point2 | null;
  headingDeg: number;
}

const BODY_LENGTH = 3e-3;
const BODY_WIDTH = 2e-3;

export function robotGlyph(cam: Camera, state: StateMessage): RobotGlyph {
  const h = (headingDeg(state.orientation) * Math.PI) / 180;
  const cx = state.position[0];
  const cz = state.position[2];
  const fwd = { x: Math.cos(h), z: -Math.sin(h) };
  const right = { x: -fwd.z, z: fwd.x };
  const nose = worldToScreen(cam, cx + fwd.x * BODY_LENGTH * 0.6, cz + fwd.z * BODY_LENGTH * 0.6);
  const tailL = worldToScreen(
    cam,
    cx - fwd.x * BODY_LENGTH * 0.4 - right.x * BODY_WIDTH * 0.5,
    cz - fwd.z * BODY_LENGTH * 0.4 - right.z * BODY_WIDTH * 0.5,
  );
  const tailR = worldToScreen(
    cam,
    cx - fwd.x * BODY_LENGTH * 0.4 + right.x * BODY_WIDTH * 0.5,
    cz - fwd.z * BODY_LENGTH * 0.4 + right.z * BODY_WIDTH * 0.5,
  );
  let anchorDot: Point2 | null = null;
  if (state.anchor === "FL" || state.anchor === "FR") {
    const side = state.anchor === "FR" ? 1 : -1;
    anchorDot = worldToScreen(
      cam,
      cx - fwd.x * BODY_LENGTH * 0.4 + side * right.x * BODY_WIDTH * 0.5,
      cz - fwd.z * BODY_LENGTH * 0.4 + side * right.z * BODY_WIDTH * 0.5,
    );
  } else if (state.anchor === "TIP") {
    anchorDot = worldToScreen(cam, cx + fwd.x * BODY_LENGTH * 0.8, cz + fwd.z * BODY_LENGTH * 0.8);
  }
  return { outline: [nose, tailL, tailR], anchorDot, headingDeg: headingDeg(state.orientation) };
}

export function tracePolyline(cam: Camera, state: StateMessage): Point2[] {
  return state.trace.map(([x, z]) => worldToScreen(cam, x, z));
}

export interface StatusPanel {
  timeText: string;
  speedText: string;
  pitchText: string;
  phase: string;
  doseText: string;
  warnings: string[];
  terminal: boolean;
  paused: boolean;
}

export function warningsOf(flags: StabilityFlags): string[] {
  const out: string[] = [];
  if (flags.alpha_exceeds_72) out.push("alpha over 72 deg: fall risk");
  if (flags.pitch_exceeds_70) out.push("pitch over 70 deg: robot may stall");
  if (flags.freq_exceeds_1p5) out.push("frequency over 1.5 Hz: unstable gait");
  return out;
}

export function statusPanel(state: StateMessage): StatusPanel {
  return {
    timeText: `t = ${state.time.toFixed(2)} s (x${state.time_scale})`,
    speedText: `${(state.speed * 1e3).toFixed(2)} mm/s`,
    pitchText: `pitch ${state.pitch_theta.toFixed(1)} deg, alpha ${state.alpha.toFixed(1)} deg`,
    phase: state.phase,
    doseText: `${Math.round(state.dose_released * 100)}%`,
    warnings: warningsOf(state.flags),
    terminal: state.terminal,
    paused: state.paused,
  };
}

/** Cone gauge: live (theta, alpha) for the dial widget. */
export function coneGauge(state: StateMessage): { theta: number; alpha: number; yawDeg: number } {
  const thetaRad = (state.pitch_theta * Math.PI) / 180;
  const alphaRad = (state.alpha * Math.PI) / 180;
  const yaw = Math.atan(Math.tan(thetaRad) * Math.sin(alphaRad));
  return { theta: state.pitch_theta, alpha: state.alpha, yawDeg: (yaw * 180) / Math.PI };
}

/** Camera that keeps the robot and its trace in view. */
export function fitCamera(state: StateMessage, width: number, height: number): Camera {
  let minX = state.position[0];
  let maxX = state.position[0];
  let minZ = state.position[2];
  let maxZ = state.position[2];
  for (const [x, z] of state.trace) {
    minX = Math.min(minX, x);
    maxX = Math.max(maxX, x);
    minZ = Math.min(minZ, z);
    maxZ = Math.max(maxZ, z);
  }
  const span = Math.max(maxX - minX, maxZ - minZ, 0.02) * 1.3;
  return {
    scale: Math.min(width, height) / span,
    centerX: (minX + maxX) / 2,
    centerZ: (minZ + maxZ) / 2,
    width,
    height,
  };
}
