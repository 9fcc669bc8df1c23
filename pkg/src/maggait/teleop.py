"""Interactive teleoperation service.

A session owns one SimulationEngine (the exact code path batch runs use)
plus wall-clock bookkeeping: ticks advance the simulation by
wall_dt x time_scale, commands are queued and applied only at tick
boundaries, and every applied command is recorded with its step index so a
log replay reproduces the trajectory bit for bit.

Wire protocol (newline-free JSON messages over WebSocket /session):
    client -> server: {"type": "command", "seq": n, "command": {...}}
    server -> client: {"type": "handshake", ...} once, then
                      {"type": "state", ...} at the telemetry rate, and
                      {"type": "ack"|"error", "seq": n, ...} per command.
Schema versions are mandatory; see the schemas/ directory.
"""

from __future__ import annotations

import asyncio
import json
from collections import deque
from pathlib import Path

import numpy as np
from fastapi import FastAPI, WebSocket, WebSocketDisconnect

from .gait import GaitParams
from .scenario import DeploymentPhase, PhaseOrderError, Scenario, SimulationEngine, trajectory_csv

SCHEMA_VERSION = 1
TELEMETRY_RATE = 30.0
MAX_TIME_SCALE = 20.0

COMMAND_TYPES = ("set_beta", "set_gait", "set_mode", "reset", "set_time_scale")


class CommandError(ValueError):
    pass


class TeleopSession:
    """One simulated rig plus command/telemetry bookkeeping."""

    def __init__(self, scenario: Scenario, scenario_id: str = "scenario", trace_length: int = 512):
        self.scenario = scenario
        self.scenario_id = scenario_id
        self.trace_length = trace_length
        self.time_scale = 1.0
        self.paused = False
        self.seq = 0
        self.command_log: list[dict] = []
        self._pending: list[dict] = []
        self._carry = 0.0
        self._reset_engine()

    def _reset_engine(self) -> None:
        self.engine = SimulationEngine(self.scenario)
        self.trace: deque[tuple[float, float]] = deque(maxlen=self.trace_length)
        p = self.engine.state.reference_position
        self.trace.append((float(p[0]), float(p[2])))

    # -- commands ---------------------------------------------------------

    def handle_command(self, command: dict) -> dict:
        """Validate and queue a command; returns the ack/error reply."""
        self.seq += 1
        seq = self.seq
        try:
            self._validate(command)
        except CommandError as exc:
            return {"type": "error", "schema_version": SCHEMA_VERSION, "seq": seq, "reason": str(exc)}
        self._pending.append(command)
        return {"type": "ack", "schema_version": SCHEMA_VERSION, "seq": seq, "command": command.get("type")}

    def _validate(self, command: dict) -> None:
        if not isinstance(command, dict) or "type" not in command:
            raise CommandError("command must be an object with a 'type'")
        kind = command["type"]
        if kind not in COMMAND_TYPES:
            raise CommandError(f"unknown command type {kind!r}")
        if kind == "set_beta":
            if not isinstance(command.get("degrees"), (int, float)) or not np.isfinite(command["degrees"]):
                raise CommandError("set_beta needs finite 'degrees'")
        elif kind == "set_gait":
            try:
                self._gait_from(command)
            except (TypeError, ValueError) as exc:
                raise CommandError(f"bad gait parameters: {exc}") from exc
        elif kind == "set_mode":
            mode = command.get("mode")
            if mode not in ("walk", "deploy", "pause"):
                raise CommandError("set_mode needs mode walk|deploy|pause")
            if self.engine.phase == DeploymentPhase.INJECTING and mode in ("walk", "deploy"):
                raise CommandError("mode change rejected during INJECTING")
        elif kind == "set_time_scale":
            factor = command.get("factor")
            if not isinstance(factor, (int, float)) or not 0.0 <= factor <= MAX_TIME_SCALE:
                raise CommandError(f"time scale must lie in [0, {MAX_TIME_SCALE}]")
        elif kind == "reset":
            pass  # scenario id optional; the session resets to its own scenario

    def _gait_from(self, command: dict) -> GaitParams:
        current = self.engine.gait
        return GaitParams(
            alpha_max=float(command.get("alpha_max", current.alpha_max)),
            frequency=float(command.get("frequency", current.frequency)),
            waveform=str(command.get("waveform", current.waveform)),
            steps_per_cycle=current.steps_per_cycle,
        )

    def _apply(self, command: dict) -> None:
        kind = command["type"]
        if kind == "set_beta":
            self.engine.command_beta(float(command["degrees"]))
        elif kind == "set_gait":
            self.engine.command_gait(self._gait_from(command))
        elif kind == "set_mode":
            mode = command["mode"]
            if mode == "pause":
                self.paused = True
            elif mode == "walk":
                self.paused = False
            elif mode == "deploy":
                self.paused = False
                try:
                    self.engine.request_deploy()
                except PhaseOrderError:
                    pass  # validated earlier; mid-flight repeats are idempotent
        elif kind == "set_time_scale":
            self.time_scale = float(command["factor"])
        elif kind == "reset":
            self.time_scale = 1.0
            self.paused = False
            self._carry = 0.0
            self._reset_engine()
        self.command_log.append({"step": len(self.engine.samples) - 1, "command": command})

    # -- ticking ----------------------------------------------------------

    def tick(self, wall_dt: float) -> dict:
        """Apply queued commands, advance by wall_dt x time_scale, report state."""
        for command in self._pending:
            self._apply(command)
        self._pending.clear()
        if not self.paused and self.time_scale > 0 and not self.engine.truncated:
            budget = wall_dt * self.time_scale + self._carry
            n_steps = int(np.floor(budget / self.engine.dt + 1e-12))
            self._carry = budget - n_steps * self.engine.dt
            for _ in range(n_steps):
                if not self.engine.step():
                    break
            p = self.engine.state.reference_position
            self.trace.append((float(p[0]), float(p[2])))
        return self.state_message()

    def replay(self) -> "TeleopSession":
        """Fresh session stepping the same steps with the recorded commands."""
        twin = TeleopSession(self.scenario, self.scenario_id, self.trace_length)
        log = sorted(self.command_log, key=lambda e: e["step"])
        cursor = 0
        total_steps = len(self.engine.samples) - 1
        for step in range(total_steps):
            while cursor < len(log) and log[cursor]["step"] == step:
                twin.engine_apply_now(log[cursor]["command"])
                cursor += 1
            twin.engine.step()
        return twin

    def engine_apply_now(self, command: dict) -> None:
        self._validate(command)
        self._apply(command)

    # -- serialization ----------------------------------------------------

    def speed_estimate(self) -> float:
        samples = self.engine.samples
        span = self.engine.gait.steps_per_cycle
        if len(samples) <= span:
            return 0.0
        a, b = samples[-1 - span], samples[-1]
        dt = b.time - a.time
        if dt <= 0:
            return 0.0
        disp = b.state.reference_position - a.state.reference_position
        n = self.scenario.surface.normal
        tangential = disp - np.dot(disp, n) * n
        return float(np.linalg.norm(tangential) / dt)

    def state_message(self) -> dict:
        s = self.engine.samples[-1]
        p = s.state.reference_position
        q = s.state.orientation
        return {
            "type": "state",
            "schema_version": SCHEMA_VERSION,
            "time": s.time,
            "position": [float(p[0]), float(p[1]), float(p[2])],
            "orientation": [float(q[0]), float(q[1]), float(q[2]), float(q[3])],
            "alpha": s.alpha,
            "beta": s.beta,
            "anchor": s.anchor.value,
            "pitch_theta": s.pitch_theta,
            "speed": self.speed_estimate(),
            "flags": {
                "alpha_exceeds_72": s.flags.alpha_exceeds_72,
                "pitch_exceeds_70": s.flags.pitch_exceeds_70,
                "freq_exceeds_1p5": s.flags.freq_exceeds_1p5,
            },
            "phase": self.engine.phase.value,
            "dose_released": self.engine.dose_released,
            "paused": self.paused,
            "time_scale": self.time_scale,
            "terminal": self.engine.truncated,
            "trace": [[x, z] for x, z in self.trace],
        }

    def handshake_message(self, role: str) -> dict:
        scen = self.scenario
        return {
            "type": "handshake",
            "schema_version": SCHEMA_VERSION,
            "scenario": self.scenario_id,
            "role": role,
            "telemetry_rate": TELEMETRY_RATE,
            "manifest": {
                "name": scen.name,
                "duration": scen.duration,
                "dt": scen.effective_dt(),
                "alpha_max": scen.gait.alpha_max,
                "frequency": scen.gait.frequency,
                "working_point": [float(v) for v in scen.rig.working_point],
            },
        }

    def trajectory_csv(self) -> str:
        return trajectory_csv(self.engine.trajectory())


# -- HTTP/WebSocket service ------------------------------------------------


def list_bundled_scenarios() -> list[dict]:
    out = []
    directory = Path(__file__).parent / "scenarios"
    for path in sorted(directory.glob("*.json")):
        try:
            doc = json.loads(path.read_text())
        except json.JSONDecodeError:
            continue
        out.append(
            {
                "id": path.stem,
                "name": doc.get("scenario", {}).get("name", path.stem),
                "description": doc.get("description", ""),
            }
        )
    return out


def create_app(config_parts: dict | None = None, frontend_dir: str | Path | None = None):
    """FastAPI app exposing /healthz, /scenarios and the /session socket."""
    from .config import load_scenario

    app = FastAPI(title="maggait teleop", version=str(SCHEMA_VERSION))
    sessions: dict[str, TeleopSession] = {}
    drivers: dict[str, int | None] = {}
    connection_counter = {"n": 0}

    def get_session(scenario_id: str) -> TeleopSession:
        if scenario_id not in sessions:
            from .cli import bundled_scenario_path

            path = Path(scenario_id)
            if not path.exists():
                path = bundled_scenario_path(scenario_id)
            if not path.exists():
                raise KeyError(scenario_id)
            scen = load_scenario(path)
            sessions[scenario_id] = TeleopSession(scen, scenario_id)
            drivers[scenario_id] = None
        return sessions[scenario_id]

    @app.get("/healthz")
    def healthz():
        return {"status": "ok", "schema_version": SCHEMA_VERSION}

    @app.get("/scenarios")
    def scenarios():
        return {"schema_version": SCHEMA_VERSION, "scenarios": list_bundled_scenarios()}

    @app.websocket("/session")
    async def session_socket(websocket: WebSocket, scenario: str = "straight_walk"):
        await websocket.accept()
        try:
            session = get_session(scenario)
        except KeyError:
            await websocket.send_json(
                {"type": "error", "schema_version": SCHEMA_VERSION, "seq": 0, "reason": f"unknown scenario {scenario!r}"}
            )
            await websocket.close()
            return
        connection_counter["n"] += 1
        conn_id = connection_counter["n"]
        if drivers.get(scenario) is None:
            drivers[scenario] = conn_id
        role = "driver" if drivers[scenario] == conn_id else "viewer"
        await websocket.send_json(session.handshake_message(role))

        async def telemetry():
            period = 1.0 / TELEMETRY_RATE
            while True:
                await asyncio.sleep(period)
                await websocket.send_json(session.tick(period))

        telemetry_task = asyncio.create_task(telemetry())
        try:
            while True:
                raw = await websocket.receive_text()
                try:
                    msg = json.loads(raw)
                except json.JSONDecodeError:
                    await websocket.send_json(
                        {"type": "error", "schema_version": SCHEMA_VERSION, "seq": 0, "reason": "malformed JSON"}
                    )
                    continue
                if msg.get("type") != "command":
                    await websocket.send_json(
                        {"type": "error", "schema_version": SCHEMA_VERSION, "seq": msg.get("seq", 0), "reason": "expected a command envelope"}
                    )
                    continue
                if drivers.get(scenario) != conn_id:
                    await websocket.send_json(
                        {"type": "error", "schema_version": SCHEMA_VERSION, "seq": msg.get("seq", 0), "reason": "viewer connections cannot command"}
                    )
                    continue
                reply = session.handle_command(msg.get("command", {}))
                if "seq" in msg:
                    reply = {**reply, "seq": msg["seq"]}
                await websocket.send_json(reply)
        except WebSocketDisconnect:
            pass
        finally:
            telemetry_task.cancel()
            if drivers.get(scenario) == conn_id:
                drivers[scenario] = None

    if frontend_dir and Path(frontend_dir).is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=str(frontend_dir), html=True), name="ui")

    return app
