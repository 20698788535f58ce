"""Command-line entry points.

    crossknit-sim run --preset 8x8 --scenario touch.json --out frames.bin
    crossknit-sim serve --preset 3x16 --port 8765 --robot kuri
    crossknit-sim demo-arm
    crossknit-sim demo-kuri
"""

from __future__ import annotations

import asyncio
import json
import sys
from pathlib import Path

import click
import numpy as np

from .core import load_preset
from .demos import (
    arm_trajectory_csv,
    demo_arm,
    demo_kuri,
    kuri_trajectory_csv,
)
from .network import _MatrixNetwork, solve_full
from .pipeline import events_to_csv, extract_events
from .pressure import field_to_resistance
from .scan import frame_period_us, load_scenario, run_scenario
from .wire import encode_frame


def _load_config(preset: str):
    try:
        return load_preset(preset)
    except ValueError as exc:
        raise click.ClickException(str(exc))


@click.group()
def main():
    """Crossbar tactile-skin simulator."""


@main.command("presets")
def presets_cmd():
    """List the shipped sensor presets."""
    from .core import PRESET_NAMES

    for name in PRESET_NAMES:
        config = load_preset(name)
        rate = 1e6 / frame_period_us(config)
        click.echo(
            f"{name}: {config.rows}x{config.cols}, taxel {config.taxel_size_mm:g} mm, "
            f"r_ref {config.r_ref_ohm / 1e3:g}k, {rate:.1f} Hz"
        )


@main.command("run")
@click.option("--preset", "-p", default=None, help="Sensor preset or TOML path.")
@click.option("--scenario", "-s", "scenario_path", required=True, type=click.Path(exists=True))
@click.option("--out", "-o", "out_path", type=click.Path(), help="Binary frame stream output.")
@click.option("--events-csv", type=click.Path(), help="Contact-event log output.")
@click.option("--snapshot-sampling", is_flag=True, help="Freeze the field per frame instead of rolling-shutter sampling.")
@click.option("--dump-voltages", type=click.Path(), help="Node-voltage CSV for the final field state.")
@click.option("--max-frames", type=int, default=None, help="Stop after this many frames.")
def run_cmd(preset, scenario_path, out_path, events_csv, snapshot_sampling, dump_voltages, max_frames):
    """Play a scenario file and record frames."""
    scenario = load_scenario(scenario_path)
    config = _load_config(preset) if preset else scenario.config()
    frames = []
    events_log = []
    for frame in run_scenario(scenario, config, snapshot=snapshot_sampling):
        frames.append(frame)
        if events_csv:
            events_log.extend(extract_events(frame, config))
        if max_frames is not None and len(frames) >= max_frames:
            break
    click.echo(f"scanned {len(frames)} frames at {1e6 / frame_period_us(config):.1f} Hz")

    if out_path:
        with open(out_path, "wb") as fh:
            for frame in frames:
                fh.write(encode_frame(frame))
        click.echo(f"wrote {out_path}")
    if events_csv:
        Path(events_csv).write_text(events_to_csv(events_log), encoding="utf-8")
        click.echo(f"wrote {events_csv}")
    if dump_voltages:
        matrix = field_to_resistance(scenario.field_at(scenario.duration_us), config)
        net = _MatrixNetwork(config, matrix)
        lines = ["sel_row,sel_col,node,voltage_v"]
        for i in range(config.rows):
            for j in range(config.cols):
                topology = net.topology(i, j)
                _, volts = solve_full(topology)
                for label, v in zip(topology.node_labels(), volts):
                    value = "" if np.isnan(v) else repr(float(v))
                    lines.append(f"{i},{j},{label},{value}")
        Path(dump_voltages).write_text("\n".join(lines) + "\n", encoding="utf-8")
        click.echo(f"wrote {dump_voltages}")


@main.command("serve")
@click.option("--preset", "-p", default="4x4", help="Sensor preset or TOML path.")
@click.option("--port", default=8765, type=int)
@click.option("--host", default="127.0.0.1")
@click.option("--robot", type=click.Choice(["none", "arm", "kuri"]), default="none")
@click.option("--scenario", "-s", "scenario_path", type=click.Path(exists=True), help="Background scenario to loop.")
@click.option("--speed", default=1.0, type=float, help="Real-time pacing factor (<1 slows down).")
@click.option("--snapshot-sampling", is_flag=True)
@click.option("--static-dir", type=click.Path(), default=None, help="Directory of UI assets (default: frontend/dist if present).")
@click.option("--no-calibration", is_flag=True, help="Skip the startup force-calibration pass.")
def serve_cmd(preset, port, host, robot, scenario_path, speed, snapshot_sampling, static_dir, no_calibration):
    """Stream frames and robot state over a WebSocket; serve the console UI."""
    from .serve import SimServer, quick_calibration

    config = _load_config(preset)
    scenario = load_scenario(scenario_path) if scenario_path else None
    if static_dir is None:
        bundled = Path(__file__).resolve().parents[2] / "frontend" / "dist"
        static_dir = str(bundled) if bundled.is_dir() else None
    calibration = None
    if not no_calibration:
        click.echo("calibrating force estimates...", err=True)
        calibration = quick_calibration(config)
    server = SimServer(
        config,
        robot_mode=robot,
        scenario=scenario,
        speed=speed,
        snapshot=snapshot_sampling,
        static_dir=static_dir,
        calibration=calibration,
    )
    click.echo(f"ws://{host}:{port}/  (preset {config.name}, robot {robot})", err=True)
    if static_dir:
        click.echo(f"console: http://{host}:{port}/  from {static_dir}", err=True)
    try:
        asyncio.run(server.run_forever(host, port))
    except KeyboardInterrupt:
        pass


@main.command("demo-arm")
@click.option("--csv", "csv_path", type=click.Path(), help="Write the EE trajectory CSV.")
@click.option("--frames", default=40, type=int, help="Push-phase length in frames.")
def demo_arm_cmd(csv_path, frames):
    """Scripted lead-through: touches relocate the end-effector, a grab closes the gripper."""
    result = demo_arm(n_push_frames=frames)
    config = load_preset("8x8")
    period = frame_period_us(config)
    final = result.final_ee_mm
    click.echo(
        f"EE moved to ({final[0]:.1f}, {final[1]:.1f}, {final[2]:.1f}) mm over "
        f"{result.frames} frames; target {tuple(round(t, 1) for t in result.target_mm)} "
        f"± {result.target_radius_mm:g} mm -> {'reached' if result.reached_target else 'MISSED'}"
    )
    click.echo(f"gripper: {result.states[-1].gripper.value} ({result.gripper_toggles} toggle)")
    if csv_path:
        Path(csv_path).write_text(arm_trajectory_csv(result, period), encoding="utf-8")
        click.echo(f"wrote {csv_path}")
    if not result.reached_target:
        sys.exit(1)


@main.command("demo-kuri")
@click.option("--csv", "csv_path", type=click.Path(), help="Write the base trajectory CSV.")
def demo_kuri_cmd(csv_path):
    """Scripted contact tour: back speeds up, side turns away, front stops."""
    result = demo_kuri()
    config = load_preset("3x16")
    period = frame_period_us(config)
    ok = True
    back = result.phase("back")
    click.echo(
        f"back contact: speed {back.states[0].linear_mm_s:.0f} -> "
        f"{back.states[-1].linear_mm_s:.0f} mm/s (sector {back.sector})"
    )
    ok &= back.states[-1].linear_mm_s > 200.0
    left = result.phase("left")
    click.echo(
        f"left contact: heading delta {left.states[-1].heading_rad - left.states[0].heading_rad:+.3f} rad"
        f" (sector {left.sector})"
    )
    ok &= left.states[-1].heading_rad < left.states[0].heading_rad
    front = result.phase("front")
    click.echo(f"front contact: speed -> {front.states[0].linear_mm_s:.0f} mm/s (sector {front.sector})")
    ok &= front.states[0].linear_mm_s == 0.0
    if csv_path:
        Path(csv_path).write_text(kuri_trajectory_csv(result, period), encoding="utf-8")
        click.echo(f"wrote {csv_path}")
    if not ok:
        click.echo("unexpected responses", err=True)
        sys.exit(1)


@main.command("scenario-template")
@click.option("--preset", "-p", default="4x4")
def scenario_template_cmd(preset):
    """Print a starter scenario JSON for a preset."""
    config = _load_config(preset)
    cx, cy = config.taxel_center_mm(config.rows // 2, config.cols // 2)
    template = {
        "name": "example",
        "preset": config.name,
        "duration_us": int(5 * frame_period_us(config)),
        "keyframes": [
            {
                "t_us": 0,
                "patches": [
                    {
                        "id": "touch",
                        "shape": {"kind": "disk", "radius_mm": 10.0},
                        "center_mm": [cx, cy],
                        "force_n": 15.0,
                    }
                ],
            }
        ],
    }
    click.echo(json.dumps(template, indent=2))


if __name__ == "__main__":
    main()
