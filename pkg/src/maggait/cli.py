"""Command-line entry point.

Subcommands:
    field      field grids or alpha sweeps -> CSV (+ optional PNG)
    sweep      locomotion characterization tables -> CSV (+ optional PNG)
    sim        scenario runs -> trajectory CSV + events JSON (+ optional PNG)
    calibrate  solve the front-foot span for a target stride
    serve      launch the interactive teleop service
    replay     re-run a manifest and verify output digests

Exit codes: 0 ok, 2 config/file error, 3 argument error, 4 runtime error.
Every output directory gets a manifest.json recording the resolved
configuration, the command line and SHA-256 digests of the outputs, which
`replay` uses to verify reproducibility.
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .config import (
    ConfigError,
    load_config,
    load_scenario,
    resolved_config_dict,
)
from .gait import CalibrationError, calibrate_foot_span
from .rig import GridBox, RigState, cone_parameters, rig_field_alpha_sweep, sample_grid
from .scenario import (
    Scenario,
    characterization_sweep,
    climb_scenario,
    events_json,
    simulate,
    trajectory_csv,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_ARGS = 3
EXIT_RUNTIME = 4


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def _fmt(v: float) -> str:
    return f"{v:.12g}"


def _parse_range(text: str) -> list[float]:
    """'start:stop:step' inclusive range, or a comma list of values."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise CliError(f"bad range {text!r} (want start:stop:step)", EXIT_ARGS)
        try:
            start, stop, step = (float(p) for p in parts)
        except ValueError:
            raise CliError(f"bad range {text!r}: not numeric", EXIT_ARGS) from None
        if step <= 0 or stop < start:
            raise CliError(f"bad range {text!r}: need stop >= start and step > 0", EXIT_ARGS)
        n = int(np.floor((stop - start) / step + 1e-9)) + 1
        return [start + k * step for k in range(n)]
    try:
        values = [float(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise CliError(f"bad value list {text!r}", EXIT_ARGS) from None
    if not values:
        raise CliError("empty range", EXIT_ARGS)
    return values


def _parse_triplet(text: str, what: str) -> tuple[float, float, float]:
    parts = text.split(",")
    if len(parts) != 3:
        raise CliError(f"{what} needs three comma-separated numbers, got {text!r}", EXIT_ARGS)
    try:
        return tuple(float(p) for p in parts)  # type: ignore[return-value]
    except ValueError:
        raise CliError(f"{what} is not numeric: {text!r}", EXIT_ARGS) from None


def _load_parts(path: str | None) -> dict:
    try:
        return load_config(path)
    except ConfigError as exc:
        raise CliError(str(exc), EXIT_CONFIG) from exc


def _sha256(path: Path) -> str:
    digest = hashlib.sha256()
    digest.update(path.read_bytes())
    return digest.hexdigest()


def write_manifest(out_dir: Path, command: list[str], parts: dict | None, outputs: list[Path]) -> Path:
    manifest = {
        "tool": "maggait",
        "version": __version__,
        "command": command,
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "config": resolved_config_dict(parts) if parts else None,
        "outputs": {p.name: _sha256(p) for p in sorted(outputs)},
    }
    path = out_dir / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return path


FIELD_COLUMNS = (
    "x_m,y_m,z_m,Bx_T,By_T,Bz_T,Bmag_T,"
    "dBxdx_T_per_m,dBxdy_T_per_m,dBxdz_T_per_m,"
    "dBydx_T_per_m,dBydy_T_per_m,dBydz_T_per_m,"
    "dBzdx_T_per_m,dBzdy_T_per_m,dBzdz_T_per_m,inside"
)


def cmd_field(args) -> int:
    parts = _load_parts(args.config)
    rig_cfg = parts["rig"]
    out = Path(args.out)
    out_dir = out.parent if out.suffix else out
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out if out.suffix else out / "field.csv"
    outputs = [csv_path]

    if args.alpha_sweep:
        alphas = _parse_range(args.alpha_sweep)
        point = np.array(_parse_triplet(args.point, "--point")) if args.point else rig_cfg.working_point
        B = rig_field_alpha_sweep(rig_cfg, args.beta, point, np.array(alphas))
        lines = ["alpha_deg,Bx_T,By_T,Bz_T,Bmag_T"]
        for a, b in zip(alphas, B):
            lines.append(",".join([_fmt(a), _fmt(b[0]), _fmt(b[1]), _fmt(b[2]), _fmt(float(np.linalg.norm(b)))]))
        csv_path.write_text("\n".join(lines) + "\n")
        if args.plot:
            from . import report

            outputs.append(report.save_alpha_sweep_figure(alphas, B, csv_path.with_suffix(".png")))
    else:
        if not args.grid:
            raise CliError("field needs either --grid or --alpha-sweep", EXIT_ARGS)
        try:
            lo_s, hi_s, res_s = args.grid.split(":")
            lo = _parse_triplet(lo_s, "grid lo")
            hi = _parse_triplet(hi_s, "grid hi")
            res = tuple(int(v) for v in res_s.split(","))
            if len(res) != 3:
                raise ValueError
        except (ValueError, CliError) as exc:
            if isinstance(exc, CliError):
                raise
            raise CliError(f"bad --grid {args.grid!r} (want x0,y0,z0:x1,y1,z1:nx,ny,nz)", EXIT_ARGS) from None
        try:
            samples = sample_grid(rig_cfg, RigState(alpha=args.alpha, beta=args.beta), GridBox(lo, hi), res)
        except ValueError as exc:
            raise CliError(str(exc), EXIT_ARGS) from exc
        lines = [FIELD_COLUMNS]
        for s in samples:
            row = list(s.position) + list(s.B) + [float(np.linalg.norm(s.B))] + list(s.gradient.flatten())
            lines.append(",".join(_fmt(v) for v in row) + f",{int(s.inside_source)}")
        csv_path.write_text("\n".join(lines) + "\n")
        if args.plot:
            from . import report

            outputs.append(report.save_grid_figure(samples, csv_path.with_suffix(".png")))

    outputs.append(write_manifest(out_dir, _command_line(args), parts, outputs))
    print(f"wrote {csv_path}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    parts = _load_parts(args.config)
    values = _parse_range(args.range)
    if args.kind == "load":
        values = [v * 1e-6 for v in values]  # CLI takes milligrams
    scen = Scenario(rig=parts["rig"], robot=parts["robot"], gait=parts["gait"], stability=parts["stability"])
    try:
        rows = characterization_sweep(args.kind, values, scen)
    except ValueError as exc:
        raise CliError(str(exc), EXIT_ARGS) from exc
    out = Path(args.out)
    out_dir = out.parent if out.suffix else out
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out if out.suffix else out / f"sweep_{args.kind}.csv"
    lines = ["kind,x,pitch_theta_deg,stride_m,speed_m_per_s,load_factor,flags"]
    for r in rows:
        lines.append(
            ",".join(
                [
                    r["kind"],
                    _fmt(r["x"]),
                    _fmt(r["pitch_theta"]),
                    _fmt(r["stride"]),
                    _fmt(r["speed"]),
                    _fmt(r["load_factor"]),
                    str(r["flags"]),
                ]
            )
        )
    csv_path.write_text("\n".join(lines) + "\n")
    outputs = [csv_path]
    if args.plot:
        from . import report

        outputs.append(report.save_sweep_figure(rows, csv_path.with_suffix(".png")))
    outputs.append(write_manifest(out_dir, _command_line(args), parts, outputs))
    print(f"wrote {csv_path}")
    return EXIT_OK


def bundled_scenario_path(name: str) -> Path:
    return Path(__file__).parent / "scenarios" / f"{name}.json"


def _resolve_scenario(ref: str) -> Path:
    p = Path(ref)
    if p.exists():
        return p
    bundled = bundled_scenario_path(ref.removesuffix(".json"))
    if bundled.exists():
        return bundled
    raise CliError(f"scenario {ref!r} not found (no file and no bundled scenario)", EXIT_CONFIG)


def cmd_sim(args) -> int:
    path = _resolve_scenario(args.scenario)
    try:
        scen = load_scenario(path)
    except ConfigError as exc:
        raise CliError(str(exc), EXIT_CONFIG) from exc
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    if scen.check_anchoring and abs(float(np.dot(scen.surface.normal, [0, 1, 0]))) < 0.99:
        traj, report_ = climb_scenario(scen)
        climb_doc = dataclasses.asdict(report_)
    else:
        traj = simulate(scen)
        climb_doc = None
    csv_path = out_dir / "trajectory.csv"
    csv_path.write_text(trajectory_csv(traj))
    events_path = out_dir / "events.json"
    doc = json.loads(events_json(traj))
    if climb_doc is not None:
        doc["climb_report"] = climb_doc
    events_path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    outputs = [csv_path, events_path]
    if args.plot:
        from . import report

        outputs.append(report.save_trajectory_figure(traj, out_dir / "trajectory.png"))
    outputs.append(write_manifest(out_dir, _command_line(args), None, outputs))
    disp = traj.displacement()
    print(f"wrote {csv_path} ({len(traj.samples)} samples, displacement {np.linalg.norm(disp)*1e3:.3f} mm)")
    if traj.truncated:
        print("run truncated early (see events.json)")
    return EXIT_OK


def cmd_calibrate(args) -> int:
    parts = _load_parts(args.config)
    rig_cfg, robot = parts["rig"], parts["robot"]
    theta = args.theta
    if theta is None:
        theta = cone_parameters(rig_cfg, 0.0, rig_cfg.working_point).pitch_theta
    try:
        d = calibrate_foot_span(args.target_stride, theta, args.alpha_max, geometry=robot)
    except CalibrationError as exc:
        raise CliError(str(exc), EXIT_RUNTIME) from exc
    updated = {"front_foot_span": d}
    print(json.dumps({"pitch_theta_deg": theta, "robot": updated}, indent=2))
    if args.write:
        if not args.config:
            raise CliError("--write needs an explicit config path", EXIT_ARGS)
        path = Path(args.config)
        doc = json.loads(path.read_text())
        doc.setdefault("robot", {})["front_foot_span"] = d
        path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
        print(f"updated {path}")
    return EXIT_OK


def cmd_serve(args) -> int:
    parts = _load_parts(args.config)
    try:
        import uvicorn

        from .teleop import create_app
    except ImportError as exc:
        raise CliError(f"service dependencies missing: {exc}", EXIT_RUNTIME) from exc
    ui_dir = Path(args.ui) if args.ui else Path.cwd() / "frontend" / "dist"
    if args.ui and not ui_dir.is_dir():
        raise CliError(f"--ui directory {ui_dir} not found", EXIT_CONFIG)
    app = create_app(parts, frontend_dir=ui_dir if ui_dir.is_dir() else None)
    print(f"serving teleop on http://{args.host}:{args.port} (WebSocket /session)")
    if ui_dir.is_dir():
        print(f"serving UI from {ui_dir}")
    try:
        uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    except (OSError, SystemExit) as exc:
        raise CliError(f"cannot bind {args.host}:{args.port}: {exc}", EXIT_RUNTIME) from exc
    return EXIT_OK


def cmd_replay(args) -> int:
    manifest_path = Path(args.manifest)
    try:
        manifest = json.loads(manifest_path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise CliError(f"cannot read manifest: {exc}", EXIT_CONFIG) from exc
    command = manifest.get("command")
    if not command:
        raise CliError("manifest has no command", EXIT_CONFIG)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    replayed = []
    skip_next = False
    for i, token in enumerate(command):
        if skip_next:
            skip_next = False
            continue
        if token in ("--out", "-o"):
            skip_next = True
            continue
        replayed.append(token)
    replayed += ["--out", str(out_dir)]
    code = main(replayed)
    if code != EXIT_OK:
        raise CliError(f"replayed command failed with exit {code}", EXIT_RUNTIME)
    new_manifest = json.loads((out_dir / "manifest.json").read_text())
    mismatches = []
    for name, digest in manifest["outputs"].items():
        if name == "manifest.json":
            continue
        if new_manifest["outputs"].get(name) != digest:
            mismatches.append(name)
    if mismatches:
        raise CliError(f"replay digests differ: {mismatches}", EXIT_RUNTIME)
    print(f"replay verified: {len(manifest['outputs'])} outputs match")
    return EXIT_OK


def _command_line(args) -> list[str]:
    return list(getattr(args, "_raw_argv", []))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="maggait", description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--version", action="version", version=f"maggait {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("field", help="export field grids or alpha sweeps")
    p.add_argument("--config", default=None, help="config JSON (default: $MAGGAIT_CONFIG or built-ins)")
    p.add_argument("--alpha", type=float, default=0.0, help="M3 angle for grid mode (deg)")
    p.add_argument("--beta", type=float, default=0.0, help="rig yaw (deg)")
    p.add_argument("--grid", default=None, help="x0,y0,z0:x1,y1,z1:nx,ny,nz (meters)")
    p.add_argument("--alpha-sweep", default=None, help="alpha range start:stop:step (deg)")
    p.add_argument("--point", default=None, help="x,y,z for --alpha-sweep (default: working point)")
    p.add_argument("--out", required=True, help="output CSV file or directory")
    p.add_argument("--plot", action="store_true", help="render a PNG next to the CSV")
    p.set_defaults(func=cmd_field)

    p = sub.add_parser("sweep", help="locomotion characterization sweeps")
    p.add_argument("kind", choices=["alpha", "pitch", "frequency", "load"])
    p.add_argument(
        "range",
        help="start:stop:step or comma list (load in mg, pitch offsets in m); "
        "put options first and a lone -- before negative ranges, e.g. "
        "`sweep --out o.csv -- pitch -0.02:0.02:0.01`",
    )
    p.add_argument("--config", default=None)
    p.add_argument("--out", required=True)
    p.add_argument("--plot", action="store_true")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("sim", help="run a scenario file (or bundled scenario name)")
    p.add_argument("scenario", help="scenario JSON path or bundled name (straight_walk, deploy_phantom, climb_wall, square_path)")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--plot", action="store_true")
    p.set_defaults(func=cmd_sim)

    p = sub.add_parser("calibrate", help="solve the foot span for a target stride")
    p.add_argument("--config", default=None)
    p.add_argument("--target-stride", type=float, default=2.0e-3 / 1.2, help="meters per cycle")
    p.add_argument("--alpha-max", type=float, default=72.0)
    p.add_argument("--theta", type=float, default=None, help="pitch (deg); default: fitted at the working point")
    p.add_argument("--write", action="store_true", help="write the span back into the config file")
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("serve", help="launch the teleop WebSocket service")
    p.add_argument("--config", default=None)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8720)
    p.add_argument("--ui", default=None, help="static UI directory (default: ./frontend/dist if present)")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("replay", help="re-run a manifest and verify digests")
    p.add_argument("manifest")
    p.add_argument("--out", required=True, help="directory for the replayed outputs")
    p.set_defaults(func=cmd_replay)

    return parser


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_ARGS if exc.code not in (0, None) else EXIT_OK
    args._raw_argv = argv
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
