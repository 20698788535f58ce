"""Scripted closed-loop demos: touch steers the arm, a contact tour steers Kuri.

Both run the whole chain offline: scenario -> rolling-shutter scan ->
contact pipeline -> command mapper -> kinematic integration, with no
randomness anywhere, so replays are bit-identical.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import SensorConfig, load_preset
from .pipeline import (
    CalibrationTable,
    Push,
    calibrate,
    classify_gesture,
    extract_events,
)
from .pressure import ContactPatch, Disk, PressureField, TransferParams, field_to_resistance
from .network import _MatrixNetwork, solve_full
from .robots import (
    ArmLimits,
    ArmState,
    BaseLimits,
    BaseState,
    CylinderMount,
    SectorMap,
    arm_velocity_command,
    gripper_command,
    kuri_base_command,
    kuri_head_command,
    step_arm,
    step_base,
)
from .scan import Scenario, frame_period_us, run_scenario


def ramp_calibration(
    config: SensorConfig,
    taxels: list[tuple[int, int]],
    forces=(5.0, 10.0, 15.0, 20.0, 25.0, 30.0),
    params: TransferParams | None = None,
    indenter_radius_mm: float = 10.0,
) -> CalibrationTable:
    """Simulated indenter ramp over selected taxels (one contact at a time)."""
    from .core import Frame

    params = params or TransferParams()
    samples = []
    for (i, j) in taxels:
        center = config.taxel_center_mm(i, j)
        for f in forces:
            field = PressureField((ContactPatch(Disk(indenter_radius_mm), center, f, "cal"),))
            matrix = field_to_resistance(field, config, params)
            code, _ = solve_full(_MatrixNetwork(config, matrix).topology(i, j))
            counts = np.zeros((config.rows, config.cols), dtype=np.int64)
            counts[i, j] = code
            samples.append((Frame(t_start_us=0, counts=counts), (i, j), f))
    return calibrate(samples)


@dataclass
class ArmDemoResult:
    states: list[ArmState]
    gestures: list[str]
    target_mm: tuple[float, float, float]
    target_radius_mm: float
    gripper_toggles: int
    frames: int

    @property
    def final_ee_mm(self) -> tuple[float, float, float]:
        return self.states[-1].ee_mm

    @property
    def reached_target(self) -> bool:
        d = np.linalg.norm(np.asarray(self.final_ee_mm) - np.asarray(self.target_mm))
        return bool(d <= self.target_radius_mm)


def demo_arm(
    n_push_frames: int = 40,
    n_grab_frames: int = 6,
    push_force_n: float = 15.0,
    params: TransferParams | None = None,
) -> ArmDemoResult:
    """Push one side of the sleeve until the EE crosses into the target region,
    then grab to close the gripper."""
    config = load_preset("8x8")
    params = params or TransferParams()
    period = frame_period_us(config)
    mount = CylinderMount(radius_mm=30.0)
    mount.check(config)
    limits = ArmLimits()

    push_taxel = (3, 0)
    push_center = config.taxel_center_mm(*push_taxel)
    # centered on a taxel so the whole 3x3 palm blob clears the contact
    # threshold and classifies as a grab
    grab_center = config.taxel_center_mm(3, 3)
    push_end = int(n_push_frames * period)
    scenario = Scenario(
        preset="8x8",
        keyframes=(
            PressureField(
                (ContactPatch(Disk(8.0), push_center, push_force_n, "push"),), t_us=0
            ),
            PressureField(
                (ContactPatch(Disk(30.0), grab_center, 50.0, "palm"),), t_us=push_end
            ),
        ),
        duration_us=int((n_push_frames + n_grab_frames) * period),
        name="arm lead-through",
    )

    touched = [push_taxel] + [(i, j) for i in range(2, 5) for j in range(2, 5)]
    calibration = ramp_calibration(config, touched, params=params)

    # the push saturates the commanded speed, so the expected displacement is
    # v_max along the inward radial at the pushed taxel
    inward = mount.inward_dir(*push_center)
    start = ArmState(ee_mm=(0.0, 0.0, 500.0))
    planned = (
        np.asarray(start.ee_mm)
        + inward * limits.v_max_mm_s * (n_push_frames * period * 1e-6)
    )

    states = [start]
    gestures = []
    toggles = 0
    state = start
    for frame in run_scenario(scenario, config, params):
        events = extract_events(frame, config, calibration)
        gesture = classify_gesture(events, config)
        gestures.append(type(gesture).__name__.lower() if gesture else "none")
        before = state.gripper
        state = gripper_command(
            gesture, state, int(frame.t_start_us), limits.gripper_refractory_us
        )
        if state.gripper is not before:
            toggles += 1
        velocity = np.zeros(3)
        if isinstance(gesture, Push) and gesture.force_n:
            velocity = arm_velocity_command(
                gesture.event, mount, v_max_mm_s=limits.v_max_mm_s
            )
        state = step_arm(state, velocity, period, limits)
        states.append(state)
    return ArmDemoResult(
        states=states,
        gestures=gestures,
        target_mm=tuple(float(v) for v in planned),
        target_radius_mm=25.0,
        gripper_toggles=toggles,
        frames=len(gestures),
    )


@dataclass
class KuriDemoPhase:
    name: str
    sector: str | None
    states: list[BaseState]
    head: tuple[str, int] | None


@dataclass
class KuriDemoResult:
    phases: list[KuriDemoPhase]

    def phase(self, name: str) -> KuriDemoPhase:
        return next(p for p in self.phases if p.name == name)


def demo_kuri(
    frames_per_phase: int = 8,
    touch_force_n: float = 15.0,
) -> KuriDemoResult:
    """Contact tour around the band: back -> speed up, left -> turn right,
    front -> stop."""
    config = load_preset("3x16")
    period = frame_period_us(config)
    sectors = SectorMap(n_cols=config.cols)
    limits = BaseLimits()

    tour = [("back", 8), ("left", 4), ("front", 0)]
    keyframes = []
    for phase_idx, (_, col) in enumerate(tour):
        center = config.taxel_center_mm(1, col)
        keyframes.append(
            PressureField(
                (ContactPatch(Disk(15.0), center, touch_force_n, "hand"),),
                t_us=int(phase_idx * frames_per_phase * period),
            )
        )
    scenario = Scenario(
        preset="3x16",
        keyframes=tuple(keyframes),
        duration_us=int(len(tour) * frames_per_phase * period),
        name="kuri contact tour",
    )

    state = BaseState(linear_mm_s=200.0)
    phases = [
        KuriDemoPhase(name=name, sector=None, states=[], head=None) for name, _ in tour
    ]
    for k, frame in enumerate(run_scenario(scenario, config)):
        phase = phases[min(k // frames_per_phase, len(phases) - 1)]
        events = [e for e in extract_events(frame, config) if not e.ghost]
        event = max(events, key=lambda e: e.peak_reading) if events else None
        if event is not None:
            phase.head = tuple(
                (v.value if hasattr(v, "value") else v)
                for v in kuri_head_command(event, config)
            )
        command = kuri_base_command(event, sectors, state, limits, config)
        if command.sector is not None:
            phase.sector = command.sector.value
        state = step_base(state, command, period)
        phase.states.append(state)
    return KuriDemoResult(phases=phases)


def arm_trajectory_csv(result: ArmDemoResult, period_us: float) -> str:
    lines = ["t_us,x_mm,y_mm,z_mm,speed_mm_s,gripper"]
    for k, s in enumerate(result.states):
        speed = math.hypot(*s.velocity_mm_s)
        lines.append(
            f"{int(k * period_us)},{s.ee_mm[0]:.3f},{s.ee_mm[1]:.3f},{s.ee_mm[2]:.3f},"
            f"{speed:.3f},{s.gripper.value}"
        )
    return "\n".join(lines) + "\n"


def kuri_trajectory_csv(result: KuriDemoResult, period_us: float) -> str:
    lines = ["t_us,phase,x_mm,y_mm,heading_rad,linear_mm_s,angular_rad_s"]
    k = 0
    for phase in result.phases:
        for s in phase.states:
            lines.append(
                f"{int(k * period_us)},{phase.name},{s.x_mm:.3f},{s.y_mm:.3f},"
                f"{s.heading_rad:.5f},{s.linear_mm_s:.1f},{s.angular_rad_s:.3f}"
            )
            k += 1
    return "\n".join(lines) + "\n"
