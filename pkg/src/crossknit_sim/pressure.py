"""Mechanical contact -> per-taxel force -> taxel resistance.

A patch presses on the sensor with a footprint (disk, square, sphere
contact spot, or point); its force lands on the taxel sensing squares it
overlaps, split proportional to overlap area. The insulating margins take
no force. Per taxel, resistance follows an inverse law above the
contact-closure threshold and is OPEN below it. An optional stateful
filter reproduces the loading/unloading hysteresis and slow drift seen on
the real fabric.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import OPEN, SensorConfig


@dataclass(frozen=True)
class Disk:
    radius_mm: float

    def __post_init__(self):
        if self.radius_mm <= 0:
            raise ValueError("disk radius must be positive")


@dataclass(frozen=True)
class Square:
    side_mm: float

    def __post_init__(self):
        if self.side_mm <= 0:
            raise ValueError("square side must be positive")


@dataclass(frozen=True)
class Sphere:
    """Spherical indenter; its contact spot is a shrunken disk."""

    radius_mm: float

    def __post_init__(self):
        if self.radius_mm <= 0:
            raise ValueError("sphere radius must be positive")


@dataclass(frozen=True)
class Point:
    pass


Shape = Disk | Square | Sphere | Point


@dataclass(frozen=True)
class ContactPatch:
    shape: Shape
    center_mm: tuple[float, float]
    force_n: float
    id: str = ""

    def __post_init__(self):
        if self.force_n < 0:
            raise ValueError("contact force cannot be negative")

    def extent_mm(self, sphere_concentration: float = 0.5) -> float:
        """Footprint half-width, used for bounds checks and culling."""
        if isinstance(self.shape, Disk):
            return self.shape.radius_mm
        if isinstance(self.shape, Square):
            return self.shape.side_mm / 2.0
        if isinstance(self.shape, Sphere):
            return self.shape.radius_mm * sphere_concentration
        return 0.0


@dataclass(frozen=True)
class PressureField:
    patches: tuple[ContactPatch, ...] = ()
    t_us: int = 0

    def __post_init__(self):
        object.__setattr__(self, "patches", tuple(self.patches))

    def check_bounds(self, config: SensorConfig) -> None:
        """Patch centers must lie within the surface plus one footprint radius."""
        for p in self.patches:
            slack = p.extent_mm()
            x, y = p.center_mm
            if not (
                -slack <= x <= config.surface_width_mm + slack
                and -slack <= y <= config.surface_height_mm + slack
            ):
                raise ValueError(f"patch {p.id!r} at {p.center_mm} is off the sensor")


@dataclass(frozen=True)
class TransferParams:
    """Force-to-resistance law: R = k / (F - offset) above the contact threshold."""

    f_contact_n: float = 2.5
    k_ohm_n: float = 2.0e6
    f_offset_n: float = 0.0
    sphere_concentration: float = 0.5

    def __post_init__(self):
        if self.f_contact_n <= 0 or self.k_ohm_n <= 0:
            raise ValueError("f_contact_n and k_ohm_n must be positive")
        if not 0 < self.sphere_concentration <= 1:
            raise ValueError("sphere_concentration must be in (0, 1]")
        if self.f_offset_n >= self.f_contact_n:
            raise ValueError("f_offset_n must stay below f_contact_n")


def _segment_integral(u: float, r: float) -> float:
    # antiderivative of sqrt(r^2 - u^2)
    u = min(max(u, -r), r)
    return 0.5 * (u * math.sqrt(max(r * r - u * u, 0.0)) + r * r * math.asin(u / r))


def _disk_corner_area(x: float, y: float, r: float) -> float:
    """Area of disk(origin, r) intersected with {u <= x, v <= y}."""
    x = min(max(x, -r), r)
    y = min(max(y, -r), r)
    s = math.sqrt(max(r * r - y * y, 0.0))
    if y >= 0:
        area = 0.0
        hi = min(x, -s)
        if hi > -r:
            area += 2.0 * (_segment_integral(hi, r) - _segment_integral(-r, r))
        hi = min(x, s)
        if hi > -s:
            area += y * (hi + s) + (_segment_integral(hi, r) - _segment_integral(-s, r))
        if x > s:
            area += 2.0 * (_segment_integral(x, r) - _segment_integral(s, r))
        return area
    hi = min(x, s)
    if hi <= -s:
        return 0.0
    return y * (hi + s) + (_segment_integral(hi, r) - _segment_integral(-s, r))


def disk_rect_overlap_mm2(
    cx: float, cy: float, r: float, x0: float, y0: float, x1: float, y1: float
) -> float:
    """Exact area of a disk clipped to an axis-aligned rectangle."""
    a = (
        _disk_corner_area(x1 - cx, y1 - cy, r)
        - _disk_corner_area(x0 - cx, y1 - cy, r)
        - _disk_corner_area(x1 - cx, y0 - cy, r)
        + _disk_corner_area(x0 - cx, y0 - cy, r)
    )
    return max(a, 0.0)


def rect_rect_overlap_mm2(
    ax0: float, ay0: float, ax1: float, ay1: float,
    bx0: float, by0: float, bx1: float, by1: float,
) -> float:
    w = min(ax1, bx1) - max(ax0, bx0)
    h = min(ay1, by1) - max(ay0, by0)
    return max(w, 0.0) * max(h, 0.0)


def _patch_overlaps(patch: ContactPatch, config: SensorConfig, conc: float) -> np.ndarray:
    """Overlap area (mm^2) of the patch footprint with every sensing square.

    A Point patch returns a unit mass on its containing taxel instead of an
    area.
    """
    rows, cols = config.rows, config.cols
    out = np.zeros((rows, cols))
    cx, cy = patch.center_mm
    shape = patch.shape

    if isinstance(shape, Point):
        for i in range(rows):
            for j in range(cols):
                x0, y0, x1, y1 = config.taxel_bounds_mm(i, j)
                if x0 <= cx < x1 and y0 <= cy < y1:
                    out[i, j] = 1.0
                    return out
        return out

    if isinstance(shape, Square):
        h = shape.side_mm / 2.0
        for i, j in _taxels_near(config, cx, cy, h):
            x0, y0, x1, y1 = config.taxel_bounds_mm(i, j)
            out[i, j] = rect_rect_overlap_mm2(
                cx - h, cy - h, cx + h, cy + h, x0, y0, x1, y1
            )
        return out

    r = shape.radius_mm * (conc if isinstance(shape, Sphere) else 1.0)
    for i, j in _taxels_near(config, cx, cy, r):
        x0, y0, x1, y1 = config.taxel_bounds_mm(i, j)
        out[i, j] = disk_rect_overlap_mm2(cx, cy, r, x0, y0, x1, y1)
    return out


def _taxels_near(config: SensorConfig, cx: float, cy: float, reach: float):
    """Taxel indices whose pitch cell could intersect the footprint."""
    ox, oy = config.grid_origin_mm
    p = config.taxel_pitch_mm
    j0 = max(int((cx - reach - ox) // p), 0)
    j1 = min(int((cx + reach - ox) // p), config.cols - 1)
    i0 = max(int((cy - reach - oy) // p), 0)
    i1 = min(int((cy + reach - oy) // p), config.rows - 1)
    for i in range(i0, i1 + 1):
        for j in range(j0, j1 + 1):
            yield i, j


def rasterize(
    field: PressureField,
    config: SensorConfig,
    params: TransferParams | None = None,
) -> np.ndarray:
    """Distribute patch forces onto the taxel grid (newtons per taxel).

    Each patch's full force is split over the sensing squares it overlaps,
    proportional to overlap area; the margins between taxels absorb
    nothing. A patch that touches no sensing square contributes zero.
    """
    conc = (params or TransferParams()).sphere_concentration
    grid = np.zeros((config.rows, config.cols))
    for patch in field.patches:
        weights = _patch_overlaps(patch, config, conc)
        total = weights.sum()
        if total > 0.0:
            grid += patch.force_n * (weights / total)
    return grid


def taxel_resistance(force_n: float, params: TransferParams | None = None) -> float:
    """Inverse transfer law; OPEN below the contact-closure threshold."""
    params = params or TransferParams()
    if force_n < 0:
        raise ValueError("force cannot be negative")
    if force_n < params.f_contact_n:
        return OPEN
    return params.k_ohm_n / (force_n - params.f_offset_n)


def resistance_grid(forces: np.ndarray, params: TransferParams | None = None) -> np.ndarray:
    params = params or TransferParams()
    forces = np.asarray(forces, dtype=float)
    closed = forces >= params.f_contact_n
    out = np.full(forces.shape, OPEN)
    denom = forces[closed] - params.f_offset_n
    out[closed] = params.k_ohm_n / denom
    return out


@dataclass
class HysteresisParams:
    h_factor: float = 1.1
    drift_force_n: float = 0.3
    drift_tau_s: float = 60.0
    drift_cap_n: float = 0.3

    def __post_init__(self):
        if self.h_factor < 1.0:
            raise ValueError("hysteresis factor must be >= 1")
        if self.drift_force_n < 0 or self.drift_cap_n < 0 or self.drift_tau_s <= 0:
            raise ValueError("drift parameters out of range")


class HysteresisState:
    """Per-taxel filter memory; single-owner mutable, not thread-safe."""

    def __init__(self, rows: int, cols: int, params: HysteresisParams | None = None):
        self.params = params or HysteresisParams()
        self.prev_force = np.zeros((rows, cols))
        self.peak_force = np.zeros((rows, cols))
        self.loading = np.ones((rows, cols), dtype=bool)
        self.loaded_time_us = np.zeros((rows, cols))

    @property
    def drift_n(self) -> np.ndarray:
        p = self.params
        raw = p.drift_force_n * (1.0 - np.exp(-self.loaded_time_us / (p.drift_tau_s * 1e6)))
        return np.minimum(raw, p.drift_cap_n)


def apply_hysteresis_drift(
    state: HysteresisState, grid: np.ndarray, dt_us: float
) -> np.ndarray:
    """One filter step: returns the adjusted force grid, mutates the state.

    Loading passes the force through. Unloading rides an elevated branch
    (h * force, capped at the episode peak so the turn-around is
    continuous). Sustained load accrues a bounded drift force that never
    relaxes, mimicking permanent fabric deformation.
    """
    if dt_us < 0:
        raise ValueError("dt_us cannot be negative")
    grid = np.asarray(grid, dtype=float)
    if grid.shape != state.prev_force.shape:
        raise ValueError("force grid shape does not match state")
    p = state.params

    loaded = grid > 0.0
    state.loaded_time_us += np.where(loaded, dt_us, 0.0)
    rising = grid > state.prev_force
    falling = grid < state.prev_force
    state.loading = np.where(rising, True, np.where(falling, False, state.loading))
    state.peak_force = np.where(loaded, np.maximum(state.peak_force, grid), 0.0)

    elevated = np.minimum(p.h_factor * grid, state.peak_force)
    out = np.where(state.loading, grid, np.maximum(grid, elevated))
    out = out + np.where(loaded, state.drift_n, 0.0)
    state.prev_force = grid.copy()
    return out


def field_to_resistance(
    field: PressureField,
    config: SensorConfig,
    params: TransferParams | None = None,
    state: HysteresisState | None = None,
    dt_us: float = 0.0,
):
    """rasterize -> (optional hysteresis/drift) -> per-taxel resistance."""
    from .core import ResistanceMatrix

    params = params or TransferParams()
    forces = rasterize(field, config, params)
    if state is not None:
        forces = apply_hysteresis_drift(state, forces, dt_us)
    return ResistanceMatrix(resistance_grid(forces, params))


# --- JSON forms shared by scenario files and the live service -------------

def shape_to_json(shape: Shape) -> dict:
    if isinstance(shape, Disk):
        return {"kind": "disk", "radius_mm": shape.radius_mm}
    if isinstance(shape, Square):
        return {"kind": "square", "side_mm": shape.side_mm}
    if isinstance(shape, Sphere):
        return {"kind": "sphere", "radius_mm": shape.radius_mm}
    return {"kind": "point"}


def shape_from_json(data: dict) -> Shape:
    kind = data.get("kind")
    if kind == "disk":
        return Disk(float(data["radius_mm"]))
    if kind == "square":
        return Square(float(data["side_mm"]))
    if kind == "sphere":
        return Sphere(float(data["radius_mm"]))
    if kind == "point":
        return Point()
    raise ValueError(f"unknown patch shape {kind!r}")


def patch_to_json(patch: ContactPatch) -> dict:
    return {
        "id": patch.id,
        "shape": shape_to_json(patch.shape),
        "center_mm": [patch.center_mm[0], patch.center_mm[1]],
        "force_n": patch.force_n,
    }


def patch_from_json(data: dict) -> ContactPatch:
    center = data["center_mm"]
    return ContactPatch(
        shape=shape_from_json(data["shape"]),
        center_mm=(float(center[0]), float(center[1])),
        force_n=float(data["force_n"]),
        id=str(data.get("id", "")),
    )


def field_to_json(field: PressureField) -> dict:
    return {"t_us": field.t_us, "patches": [patch_to_json(p) for p in field.patches]}


def field_from_json(data: dict) -> PressureField:
    return PressureField(
        patches=tuple(patch_from_json(p) for p in data.get("patches", [])),
        t_us=int(data.get("t_us", 0)),
    )
