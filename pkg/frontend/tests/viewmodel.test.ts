import { describe, expect, it } from "vitest";

import type { StateMessage } from "../src/protocol.js";
import {
  bodyAxisWorld,
  coneGauge,
  fitCamera,
  headingDeg,
  robotGlyph,
  statusPanel,
  warningsOf,
  worldToScreen,
} from "../src/viewmodel.js";

function baseState(overrides: Partial<StateMessage> = {}): StateMessage {
  return {
    type: "state",
    schema_version: 1,
    time: 2.0,
    position: [0.005, -0.018, -0.002],
    orientation: [1, 0, 0, 0],
    alpha: 20,
    beta: 0,
    anchor: "FR",
    pitch_theta: 62.4,
    speed: 0.002,
    flags: { alpha_exceeds_72: false, pitch_exceeds_70: false, freq_exceeds_1p5: false },
    phase: "WALKING",
    dose_released: 0.5,
    paused: false,
    time_scale: 2,
    terminal: false,
    trace: [
      [0, 0],
      [0.002, -0.001],
      [0.005, -0.002],
    ],
    ...overrides,
  };
}

describe("quaternion heading", () => {
  it("identity points along +x with heading 0", () => {
    expect(bodyAxisWorld([1, 0, 0, 0])).toEqual([1, 0, 0]);
    expect(headingDeg([1, 0, 0, 0])).toBeCloseTo(0);
  });

  it("yaw quaternions recover their angle", () => {
    for (const deg of [-120, -45, 30, 90]) {
      const half = (deg * Math.PI) / 360;
      const q: [number, number, number, number] = [Math.cos(half), 0, Math.sin(half), 0];
      expect(headingDeg(q)).toBeCloseTo(deg, 6);
    }
  });
});

describe("camera", () => {
  it("maps the camera center to the canvas center", () => {
    const cam = { scale: 1000, centerX: 0.01, centerZ: -0.01, width: 800, height: 600 };
    const p = worldToScreen(cam, 0.01, -0.01);
    expect(p.x).toBe(400);
    expect(p.y).toBe(300);
  });

  it("fitCamera covers the trace", () => {
    const cam = fitCamera(baseState(), 800, 600);
    for (const [x, z] of baseState().trace) {
      const p = worldToScreen(cam, x, z);
      expect(p.x).toBeGreaterThanOrEqual(0);
      expect(p.x).toBeLessThanOrEqual(800);
      expect(p.y).toBeGreaterThanOrEqual(0);
      expect(p.y).toBeLessThanOrEqual(600);
    }
  });
});

describe("robot glyph", () => {
  it("marks the anchored front foot", () => {
    const cam = fitCamera(baseState(), 800, 600);
    const fr = robotGlyph(cam, baseState({ anchor: "FR" }));
    const fl = robotGlyph(cam, baseState({ anchor: "FL" }));
    expect(fr.anchorDot).not.toBeNull();
    expect(fl.anchorDot).not.toBeNull();
    // the two feet are on opposite lateral sides
    expect(fr.anchorDot!.y).not.toBeCloseTo(fl.anchorDot!.y, 1);
  });

  it("marks the capillary tip ahead of the nose during deployment", () => {
    const cam = fitCamera(baseState(), 800, 600);
    const glyph = robotGlyph(cam, baseState({ anchor: "TIP", phase: "TIP_CONTACT" }));
    expect(glyph.anchorDot).not.toBeNull();
    expect(glyph.anchorDot!.x).toBeGreaterThan(glyph.outline[0].x);
  });
});

describe("status panel", () => {
  it("lists warnings when flags fire", () => {
    expect(warningsOf({ alpha_exceeds_72: false, pitch_exceeds_70: false, freq_exceeds_1p5: false })).toEqual([]);
    const warned = warningsOf({ alpha_exceeds_72: true, pitch_exceeds_70: false, freq_exceeds_1p5: true });
    expect(warned).toHaveLength(2);
    expect(warned.join(" ")).toMatch(/72/);
    expect(warned.join(" ")).toMatch(/1\.5/);
  });

  it("formats time, speed and dose", () => {
    const panel = statusPanel(baseState());
    expect(panel.timeText).toContain("2.00 s");
    expect(panel.speedText).toContain("2.00 mm/s");
    expect(panel.doseText).toBe("50%");
    expect(panel.phase).toBe("WALKING");
  });
});

describe("cone gauge", () => {
  it("gives zero yaw at alpha 0 and the chord yaw elsewhere", () => {
    expect(coneGauge(baseState({ alpha: 0 })).yawDeg).toBeCloseTo(0);
    const g = coneGauge(baseState({ alpha: 72, pitch_theta: 62.4 }));
    const expected = (Math.atan(Math.tan((62.4 * Math.PI) / 180) * Math.sin((72 * Math.PI) / 180)) * 180) / Math.PI;
    expect(g.yawDeg).toBeCloseTo(expected, 6);
  });
});
