/**
 * Latest-wins state mailbox decoupling socket delivery from rendering.
 *
 * The socket thread posts every state; the render loop takes at its own
 * pace and always sees the newest one. States older than the last rendered
 * time are dropped so an out-of-order frame can never roll the view back.
 */

import type { StateMessage } from "./protocol.js";

export class StateMailbox {
  private latest: StateMessage | null = null;
  private lastTakenTime = -Infinity;
  private droppedStale = 0;

  post(state: StateMessage): boolean {
    if (state.time < this.lastTakenTime) {
      this.droppedStale += 1;
      return false;
    }
    if (this.latest !== null && state.time < this.latest.time) {
      this.droppedStale += 1;
      return false;
    }
    this.latest = state;
    return true;
  }

  /** Newest unrendered state, or null; marks it rendered. */
  take(): StateMessage | null {
    const state = this.latest;
    if (state === null) return null;
    this.latest = null;
    this.lastTakenTime = state.time;
    return state;
  }

  peek(): StateMessage | null {
    return this.latest;
  }

  get staleDropCount(): number {
    return this.droppedStale;
  }
}
