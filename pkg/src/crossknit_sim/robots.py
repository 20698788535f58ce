"""Touch-to-command mappers and the two simulated robots.

Arm: the sensor wraps a cylinder on the forearm; a push commands the
end-effector away from the contact (from the surface point toward the
cylinder axis) at a speed proportional to force, and a large-area grab
toggles the gripper. Base: a band around the mobile robot's cone maps
columns to bearing; front contact stops it, side contact turns it away,
back contact pushes it faster. Head: row picks pitch, column picks yaw.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from .core import SensorConfig
from .pipeline import ContactEvent, Grab


def _unit(v: np.ndarray) -> np.ndarray:
    n = np.linalg.norm(v)
    if n == 0:
        raise ValueError("zero-length direction")
    return v / n


@dataclass(frozen=True)
class CylinderMount:
    """Maps sensor-surface (x, y) mm onto a cylinder in the world frame.

    Columns wrap around the circumference (x = arc length from the seam at
    column edge x=0); rows run along the axis (y = height above the axis
    origin).
    """

    radius_mm: float
    axis_origin_mm: tuple[float, float, float] = (0.0, 0.0, 0.0)
    axis_dir: tuple[float, float, float] = (0.0, 0.0, 1.0)
    seam_dir: tuple[float, float, float] = (1.0, 0.0, 0.0)  # theta=0 direction

    def __post_init__(self):
        if self.radius_mm <= 0:
            raise ValueError("cylinder radius must be positive")
        d = _unit(np.asarray(self.axis_dir, dtype=float))
        s = np.asarray(self.seam_dir, dtype=float)
        s = s - (s @ d) * d  # project the seam reference off the axis
        if np.linalg.norm(s) < 1e-12:
            raise ValueError("seam direction parallel to the axis")
        object.__setattr__(self, "axis_dir", tuple(d))
        object.__setattr__(self, "seam_dir", tuple(_unit(s)))

    @property
    def circumference_mm(self) -> float:
        return 2.0 * math.pi * self.radius_mm

    def check(self, config: SensorConfig) -> None:
        if config.grid_width_mm > self.circumference_mm + 1e-9:
            raise ValueError("sensor is wider than the cylinder circumference")

    def _basis(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        d = np.asarray(self.axis_dir)
        e1 = np.asarray(self.seam_dir)
        e2 = np.cross(d, e1)
        return e1, e2, d

    def surface_point_mm(self, x_mm: float, y_mm: float) -> np.ndarray:
        """World-frame point for sensor coordinates (x along wrap, y along axis)."""
        e1, e2, d = self._basis()
        theta = x_mm / self.radius_mm
        radial = math.cos(theta) * e1 + math.sin(theta) * e2
        return (
            np.asarray(self.axis_origin_mm)
            + y_mm * d
            + self.radius_mm * radial
        )

    def inward_dir(self, x_mm: float, y_mm: float) -> np.ndarray:
        """Unit vector from the surface point to its foot on the axis."""
        e1, e2, _ = self._basis()
        theta = x_mm / self.radius_mm
        return -(math.cos(theta) * e1 + math.sin(theta) * e2)


class Gripper(Enum):
    OPEN = "open"
    CLOSED = "closed"


@dataclass(frozen=True)
class ArmState:
    ee_mm: tuple[float, float, float] = (0.0, 0.0, 0.0)
    gripper: Gripper = Gripper.OPEN
    velocity_mm_s: tuple[float, float, float] = (0.0, 0.0, 0.0)
    last_gripper_toggle_us: int = -(10**12)


@dataclass(frozen=True)
class ArmLimits:
    v_max_mm_s: float = 100.0
    workspace_min_mm: tuple[float, float, float] = (-500.0, -500.0, 0.0)
    workspace_max_mm: tuple[float, float, float] = (500.0, 500.0, 1000.0)
    gripper_refractory_us: int = 1_000_000


def arm_velocity_command(
    event: ContactEvent,
    mount: CylinderMount,
    gain_mm_s_per_n: float = 10.0,
    v_max_mm_s: float = 100.0,
    force_n: float | None = None,
) -> np.ndarray:
    """Velocity from the contact point toward the cylinder axis.

    Magnitude is gain * force, saturated at v_max. Always perpendicular to
    the axis because the inward radial direction has no axial component.
    """
    if event.ghost:
        raise ValueError("ghost events must not drive the arm")
    force = event.force_n if force_n is None else force_n
    if force is None:
        raise ValueError("event carries no force estimate")
    x, y = event.centroid_mm
    direction = mount.inward_dir(x, y)
    speed = min(gain_mm_s_per_n * max(force, 0.0), v_max_mm_s)
    return speed * direction


def gripper_command(
    gesture, state: ArmState, t_us: int, refractory_us: int = 1_000_000
) -> ArmState:
    """Grab toggles the gripper, debounced by the refractory window."""
    if not isinstance(gesture, Grab):
        return state
    if t_us - state.last_gripper_toggle_us < refractory_us:
        return state
    flipped = Gripper.CLOSED if state.gripper is Gripper.OPEN else Gripper.OPEN
    return replace(state, gripper=flipped, last_gripper_toggle_us=t_us)


def step_arm(
    state: ArmState,
    velocity_mm_s: np.ndarray,
    dt_us: float,
    limits: ArmLimits | None = None,
) -> ArmState:
    """Forward-Euler EE integration inside the workspace box."""
    limits = limits or ArmLimits()
    v = np.asarray(velocity_mm_s, dtype=float)
    speed = float(np.linalg.norm(v))
    if speed > limits.v_max_mm_s and speed > 0:
        v = v * (limits.v_max_mm_s / speed)
    pos = np.asarray(state.ee_mm) + v * (dt_us * 1e-6)
    pos = np.minimum(
        np.maximum(pos, np.asarray(limits.workspace_min_mm)),
        np.asarray(limits.workspace_max_mm),
    )
    return replace(state, ee_mm=tuple(pos), velocity_mm_s=tuple(v))


# --- mobile base ------------------------------------------------------------

class HeadPitch(Enum):
    UP = "up"
    FORWARD = "forward"
    DOWN = "down"


_PITCH_BY_ROW = (HeadPitch.UP, HeadPitch.FORWARD, HeadPitch.DOWN)


class Sector(Enum):
    FRONT = "front"
    LEFT = "left"
    RIGHT = "right"
    BACK = "back"


@dataclass(frozen=True)
class SectorMap:
    """Partition of the band's columns into front/left/back/right arcs.

    Columns count counterclockwise (seen from above) starting at the seam;
    the front arc is centered on `front_center_col`. Defaults split 16
    columns into four arcs of four.
    """

    n_cols: int = 16
    front_center_col: float = 0.0
    front_width: int | None = None  # defaults to a quarter of the band
    back_width: int | None = None

    def __post_init__(self):
        quarter = max(self.n_cols // 4, 1)
        if self.front_width is None:
            object.__setattr__(self, "front_width", quarter)
        if self.back_width is None:
            object.__setattr__(self, "back_width", quarter)
        if self.front_width + self.back_width >= self.n_cols:
            raise ValueError("front and back arcs leave no room for the sides")

    def sector_of(self, col: int) -> Sector:
        if not 0 <= col < self.n_cols:
            raise ValueError(f"column {col} outside the {self.n_cols}-column band")
        # signed offset from the front center, wrapped to [-n/2, n/2)
        off = (col - self.front_center_col) % self.n_cols
        if off >= self.n_cols / 2:
            off -= self.n_cols
        if -self.front_width / 2 <= off < self.front_width / 2:
            return Sector.FRONT
        if off >= self.n_cols / 2 - self.back_width / 2:
            return Sector.BACK
        if off < -self.n_cols / 2 + self.back_width / 2:
            return Sector.BACK
        return Sector.LEFT if off > 0 else Sector.RIGHT


@dataclass(frozen=True)
class BaseLimits:
    v_max_mm_s: float = 400.0
    speed_step_mm_s: float = 100.0
    turn_rate_rad_s: float = 0.8


@dataclass(frozen=True)
class BaseState:
    x_mm: float = 0.0
    y_mm: float = 0.0
    heading_rad: float = 0.0
    linear_mm_s: float = 0.0
    angular_rad_s: float = 0.0
    head_pitch: HeadPitch = HeadPitch.FORWARD
    head_yaw_index: int = 0


@dataclass(frozen=True)
class BaseCommand:
    linear_mm_s: float
    angular_rad_s: float
    sector: Sector | None = None


def kuri_head_command(
    event: ContactEvent, config: SensorConfig
) -> tuple[HeadPitch, int]:
    """Row selects pitch (up/forward/down), column of the centroid selects yaw."""
    if config.rows != len(_PITCH_BY_ROW):
        raise ValueError("head mapping expects the 3-row band")
    rows = sorted({i for i, _ in event.taxels})
    pitch = _PITCH_BY_ROW[int(round(np.mean(rows)))]
    ox, _ = config.grid_origin_mm
    col = int((event.centroid_mm[0] - ox) // config.taxel_pitch_mm)
    col = min(max(col, 0), config.cols - 1)
    return pitch, col


def kuri_base_command(
    event: ContactEvent | None,
    sectors: SectorMap,
    state: BaseState,
    limits: BaseLimits | None = None,
    config: SensorConfig | None = None,
) -> BaseCommand:
    """Stop on front contact, turn away from side contact, speed up from back."""
    limits = limits or BaseLimits()
    if event is None or event.ghost:
        return BaseCommand(linear_mm_s=state.linear_mm_s, angular_rad_s=0.0)
    if config is not None:
        ox, _ = config.grid_origin_mm
        col = int((event.centroid_mm[0] - ox) // config.taxel_pitch_mm)
        col = min(max(col, 0), sectors.n_cols - 1)
    else:
        cols = [j for _, j in event.taxels]
        col = int(round(np.mean(cols)))
    sector = sectors.sector_of(col)
    if sector is Sector.FRONT:
        return BaseCommand(0.0, 0.0, sector)
    if sector is Sector.BACK:
        faster = min(state.linear_mm_s + limits.speed_step_mm_s, limits.v_max_mm_s)
        return BaseCommand(faster, 0.0, sector)
    # side contact: turn toward the opposite side (left contact -> clockwise)
    turn = -limits.turn_rate_rad_s if sector is Sector.LEFT else limits.turn_rate_rad_s
    return BaseCommand(state.linear_mm_s, turn, sector)


def step_base(state: BaseState, command: BaseCommand, dt_us: float) -> BaseState:
    """Unicycle forward-Euler step."""
    dt = dt_us * 1e-6
    heading = state.heading_rad + command.angular_rad_s * dt
    return replace(
        state,
        x_mm=state.x_mm + command.linear_mm_s * math.cos(state.heading_rad) * dt,
        y_mm=state.y_mm + command.linear_mm_s * math.sin(state.heading_rad) * dt,
        heading_rad=heading,
        linear_mm_s=command.linear_mm_s,
        angular_rad_s=command.angular_rad_s,
    )
