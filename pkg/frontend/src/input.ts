/**
 * Steering input: keyboard slew for beta, sliders for gait, mode buttons.
 *
 * Holding an arrow key slews the commanded beta at a fixed rate and emits
 * set_beta commands at the sampling cadence, so one second of right arrow
 * at 30 deg/s totals -30 degrees (rightward = clockwise from above).
 */

import type { Command } from "./protocol.js";

export const BETA_SLEW_RATE = 30.0; // deg/s
export const COMMAND_RATE = 15.0; // commands/s while a key is held

export class SteeringInput {
  private beta = 0;
  private leftHeld = false;
  private rightHeld = false;

  constructor(initialBeta = 0) {
    this.beta = initialBeta;
  }

  keyEvent(key: string, down: boolean): void {
    if (key === "ArrowLeft") this.leftHeld = down;
    if (key === "ArrowRight") this.rightHeld = down;
  }

  get commandedBeta(): number {
    return this.beta;
  }

  /**
   * Advance the slew by dt seconds; returns a set_beta command when the
   * commanded angle moved.
   */
  sample(dt: number): Command | null {
    let direction = 0;
    if (this.leftHeld) direction += 1; // +beta turns the heading left
    if (this.rightHeld) direction -= 1;
    if (direction === 0) return null;
    this.beta += direction * BETA_SLEW_RATE * dt;
    return { type: "set_beta", degrees: this.beta };
  }
}

export interface GaitSliderValues {
  alpha_max: number;
  frequency: number;
}

export function gaitCommand(values: GaitSliderValues): Command {
  return { type: "set_gait", alpha_max: values.alpha_max, frequency: values.frequency };
}

/** Out-of-envelope slider values get the warning styling. */
export function sliderWarnings(values: GaitSliderValues): { alpha: boolean; frequency: boolean } {
  return { alpha: values.alpha_max > 72.0, frequency: values.frequency > 1.5 };
}

export function modeCommand(mode: "walk" | "deploy" | "pause"): Command {
  return { type: "set_mode", mode };
}
