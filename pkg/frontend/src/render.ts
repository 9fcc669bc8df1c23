/**
 * Canvas drawing of the top-down view plus the deployment side inset.
 * All geometry comes precomputed from the viewmodel; this file only paints.
 */

import type { StateMessage } from "./protocol.js";
import {
  Camera,
  coneGauge,
  fitCamera,
  robotGlyph,
  statusPanel,
  tracePolyline,
} from "./viewmodel.js";

const COLORS = {
  background: "#10141a",
  grid: "#1d2430",
  trace: "#4aa3ff",
  robot: "#e8eef7",
  anchor: "#ffb020",
  tip: "#ff5370",
  text: "#aab6c8",
  warn: "#ffb020",
};

export function renderFrame(ctx: CanvasRenderingContext2D, state: StateMessage): void {
  const { width, height } = ctx.canvas;
  const cam = fitCamera(state, width, height);
  ctx.fillStyle = COLORS.background;
  ctx.fillRect(0, 0, width, height);
  drawGrid(ctx, cam);
  drawTrace(ctx, cam, state);
  drawRobot(ctx, cam, state);
  drawScaleBar(ctx, cam);
  if (state.phase !== "WALKING") {
    drawSideInset(ctx, state);
  }
}

function drawGrid(ctx: CanvasRenderingContext2D, cam: Camera): void {
  const stepPx = cam.scale * 0.01; // 10 mm grid
  if (stepPx < 8) return;
  ctx.strokeStyle = COLORS.grid;
  ctx.lineWidth = 1;
  const x0 = (cam.width / 2 - cam.centerX * cam.scale) % stepPx;
  const y0 = (cam.height / 2 - cam.centerZ * cam.scale) % stepPx;
  for (let x = x0; x < cam.width; x += stepPx) {
    ctx.beginPath();
    ctx.moveTo(x, 0);
    ctx.lineTo(x, cam.height);
    ctx.stroke();
  }
  for (let y = y0; y < cam.height; y += stepPx) {
    ctx.beginPath();
    ctx.moveTo(0, y);
    ctx.lineTo(cam.width, y);
    ctx.stroke();
  }
}

function drawTrace(ctx: CanvasRenderingContext2D, cam: Camera, state: StateMessage): void {
  const pts = tracePolyline(cam, state);
  if (pts.length < 2) return;
  ctx.strokeStyle = COLORS.trace;
  ctx.lineWidth = 1.5;
  ctx.setLineDash([5, 4]);
  ctx.beginPath();
  ctx.moveTo(pts[0].x, pts[0].y);
  for (const p of pts.slice(1)) ctx.lineTo(p.x, p.y);
  ctx.stroke();
  ctx.setLineDash([]);
}

function drawRobot(ctx: CanvasRenderingContext2D, cam: Camera, state: StateMessage): void {
  const glyph = robotGlyph(cam, state);
  ctx.fillStyle = COLORS.robot;
  ctx.beginPath();
  ctx.moveTo(glyph.outline[0].x, glyph.outline[0].y);
  for (const p of glyph.outline.slice(1)) ctx.lineTo(p.x, p.y);
  ctx.closePath();
  ctx.fill();
  if (glyph.anchorDot) {
    ctx.fillStyle = state.anchor === "TIP" ? COLORS.tip : COLORS.anchor;
    ctx.beginPath();
    ctx.arc(glyph.anchorDot.x, glyph.anchorDot.y, 4, 0, 2 * Math.PI);
    ctx.fill();
  }
}

function drawScaleBar(ctx: CanvasRenderingContext2D, cam: Camera): void {
  const mmPx = cam.scale * 0.005; // 5 mm bar
  ctx.strokeStyle = COLORS.text;
  ctx.lineWidth = 2;
  ctx.beginPath();
  ctx.moveTo(12, cam.height - 14);
  ctx.lineTo(12 + mmPx, cam.height - 14);
  ctx.stroke();
  ctx.fillStyle = COLORS.text;
  ctx.font = "11px system-ui";
  ctx.fillText("5 mm", 14, cam.height - 20);
}

/** Side-view inset during deployment: body elevation and the tip marker. */
function drawSideInset(ctx: CanvasRenderingContext2D, state: StateMessage): void {
  const w = 170;
  const h = 110;
  const x0 = ctx.canvas.width - w - 10;
  const y0 = 10;
  ctx.fillStyle = "rgba(16,20,26,0.9)";
  ctx.fillRect(x0, y0, w, h);
  ctx.strokeStyle = COLORS.grid;
  ctx.strokeRect(x0, y0, w, h);
  const groundY = y0 + h - 22;
  ctx.strokeStyle = COLORS.text;
  ctx.beginPath();
  ctx.moveTo(x0 + 8, groundY);
  ctx.lineTo(x0 + w - 8, groundY);
  ctx.stroke();
  // body line at the alpha-dependent elevation of the cone
  const theta = (state.pitch_theta * Math.PI) / 180;
  const alpha = (state.alpha * Math.PI) / 180;
  const elev = Math.atan2(
    Math.sin(theta) * Math.cos(alpha),
    Math.hypot(Math.cos(theta), Math.sin(theta) * Math.sin(alpha)),
  );
  const cxp = x0 + 46;
  const len = 46;
  ctx.strokeStyle = COLORS.robot;
  ctx.lineWidth = 3;
  ctx.beginPath();
  ctx.moveTo(cxp, groundY);
  ctx.lineTo(cxp + len * Math.cos(elev), groundY - len * Math.sin(elev));
  ctx.stroke();
  ctx.lineWidth = 1;
  // tip marker past the body end; touches the ground line near alpha 90
  const tipX = cxp + (len + 14) * Math.cos(elev);
  const tipY = groundY - (len + 14) * Math.sin(elev);
  ctx.fillStyle = COLORS.tip;
  ctx.beginPath();
  ctx.arc(tipX, Math.min(tipY, groundY), 3.5, 0, 2 * Math.PI);
  ctx.fill();
  ctx.fillStyle = COLORS.text;
  ctx.font = "11px system-ui";
  ctx.fillText(`side view  alpha=${state.alpha.toFixed(0)}`, x0 + 8, y0 + 14);
  const gauge = coneGauge(state);
  ctx.fillText(`theta=${gauge.theta.toFixed(1)}`, x0 + 8, y0 + 28);
}

export function renderStatus(el: HTMLElement, state: StateMessage): void {
  const panel = statusPanel(state);
  const warnings = panel.warnings.map((w) => `<span class="warn">${w}</span>`).join(" ");
  el.innerHTML =
    `<span>${panel.timeText}</span> <span>${panel.speedText}</span> ` +
    `<span>${panel.pitchText}</span> <span class="phase">${panel.phase}</span> ` +
    `<span>dose ${panel.doseText}</span> ` +
    (panel.paused ? `<span class="warn">paused</span> ` : "") +
    (panel.terminal ? `<span class="warn">terminated</span> ` : "") +
    warnings;
}
