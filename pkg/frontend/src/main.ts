/**
 * DOM wiring: connect, pump input at a fixed cadence, render the newest
 * state on each animation frame (latest-wins; stale frames dropped).
 */

import { TeleopClient } from "./client.js";
import { COMMAND_RATE, SteeringInput, gaitCommand, modeCommand, sliderWarnings } from "./input.js";
import { renderFrame, renderStatus } from "./render.js";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function main(): void {
  const canvas = el<HTMLCanvasElement>("view");
  const ctx = canvas.getContext("2d");
  if (!ctx) throw new Error("canvas 2d context unavailable");
  const statusBar = el<HTMLElement>("status");
  const connBadge = el<HTMLElement>("connection");
  const roleBadge = el<HTMLElement>("role");
  const banner = el<HTMLElement>("banner");

  const params = new URLSearchParams(window.location.search);
  const scenario = params.get("scenario") ?? "straight_walk";
  const wsScheme = window.location.protocol === "https:" ? "wss" : "ws";
  const url = `${wsScheme}://${window.location.host}/session?scenario=${scenario}`;

  const client = new TeleopClient(url, {
    onStatus: (status, detail) => {
      connBadge.textContent = status;
      connBadge.className = status === "connected" ? "ok" : "warn";
      if (status === "schema-mismatch") {
        banner.textContent = detail ?? "schema mismatch";
        banner.style.display = "block";
      }
    },
    onHandshake: (handshake) => {
      roleBadge.textContent = handshake.role;
      roleBadge.className = handshake.role === "driver" ? "ok" : "";
    },
  });
  client.connect();

  const steering = new SteeringInput();
  window.addEventListener("keydown", (e) => steering.keyEvent(e.key, true));
  window.addEventListener("keyup", (e) => steering.keyEvent(e.key, false));
  setInterval(() => {
    const cmd = steering.sample(1 / COMMAND_RATE);
    if (cmd) client.sendCommand(cmd);
  }, 1000 / COMMAND_RATE);

  const alphaSlider = el<HTMLInputElement>("alpha");
  const freqSlider = el<HTMLInputElement>("frequency");
  const pushGait = () => {
    const values = { alpha_max: Number(alphaSlider.value), frequency: Number(freqSlider.value) };
    const warn = sliderWarnings(values);
    alphaSlider.classList.toggle("out-of-envelope", warn.alpha);
    freqSlider.classList.toggle("out-of-envelope", warn.frequency);
    el<HTMLElement>("alpha-label").textContent = `alpha_max ${values.alpha_max} deg`;
    el<HTMLElement>("freq-label").textContent = `frequency ${values.frequency} Hz`;
    client.sendCommand(gaitCommand(values));
  };
  alphaSlider.addEventListener("input", pushGait);
  freqSlider.addEventListener("input", pushGait);

  el<HTMLButtonElement>("btn-walk").addEventListener("click", () => client.sendCommand(modeCommand("walk")));
  el<HTMLButtonElement>("btn-deploy").addEventListener("click", () => client.sendCommand(modeCommand("deploy")));
  el<HTMLButtonElement>("btn-pause").addEventListener("click", () => client.sendCommand(modeCommand("pause")));
  el<HTMLButtonElement>("btn-reset").addEventListener("click", () => client.sendCommand({ type: "reset" }));
  el<HTMLInputElement>("timescale").addEventListener("input", (e) => {
    const factor = Number((e.target as HTMLInputElement).value);
    el<HTMLElement>("timescale-label").textContent = `time x${factor}`;
    client.sendCommand({ type: "set_time_scale", factor });
  });

  const frame = () => {
    const state = client.mailbox.take();
    if (state) {
      renderFrame(ctx, state);
      renderStatus(statusBar, state);
    }
    requestAnimationFrame(frame);
  };
  requestAnimationFrame(frame);
}

window.addEventListener("DOMContentLoaded", main);
