"""Sensor geometry, ADC conversions, and the numeric types shared by every module.

Coordinates: x runs along columns, y along rows, both in millimeters on the
sensor surface. The taxel grid sits centered on the surface; each taxel's
sensing square is centered in its pitch cell with half the insulating margin
on each side.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from importlib import resources

import numpy as np

try:
    import tomllib
except ImportError:  # Python < 3.11
    import tomli as tomllib

# Open circuit: the mesh layer keeps the conductive layers apart, so an
# untouched taxel is a true infinite resistance, not a large finite one.
# IEEE +inf keeps that exact (1/OPEN == 0.0, no tolerance needed).
OPEN = math.inf

ADC_FULL_SCALE = 1024
ADC_MAX_CODE = 1023

PRESET_NAMES = ("4x4", "3x16", "8x8")


def is_open(r_ohm: float) -> bool:
    return math.isinf(r_ohm)


def quantize_code(value: float) -> int:
    """Round a raw ADC value (half away from zero) and clamp to emittable codes."""
    return min(max(int(math.floor(value + 0.5)), 0), ADC_MAX_CODE)


@dataclass(frozen=True)
class SensorConfig:
    """Geometry, resistances, and timing of one sensor prototype."""

    rows: int
    cols: int
    taxel_size_mm: float
    margin_width_mm: float
    taxel_pitch_mm: float
    r_margin_ohm: float
    r_ref_ohm: float
    vcc_volts: float = 5.0
    adc_full_scale: int = ADC_FULL_SCALE
    adc_max_code: int = ADC_MAX_CODE
    t_write_us: float = 27.2
    t_read_us: float = 400.0
    # Overall swatch size; the taxel grid is centered inside it. Defaults to
    # the bare grid extent when not given.
    surface_width_mm: float | None = None
    surface_height_mm: float | None = None
    name: str = ""

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise ValueError("grid must have at least one row and one column")
        if self.taxel_size_mm <= 0 or self.margin_width_mm < 0:
            raise ValueError("taxel size must be positive, margin non-negative")
        if not math.isclose(
            self.taxel_pitch_mm, self.taxel_size_mm + self.margin_width_mm
        ):
            raise ValueError("taxel_pitch_mm must equal taxel_size + margin width")
        # The stripe margin may be idealized to zero; the reference resistor
        # and supply must be real.
        if self.r_margin_ohm < 0 or self.r_ref_ohm <= 0:
            raise ValueError("r_margin_ohm must be >= 0 and r_ref_ohm > 0")
        if self.vcc_volts <= 0:
            raise ValueError("vcc_volts must be positive")
        if self.adc_max_code != self.adc_full_scale - 1:
            raise ValueError("adc_max_code must be adc_full_scale - 1")
        if self.t_write_us <= 0 or self.t_read_us <= 0:
            raise ValueError("write/read delays must be positive")
        if self.surface_width_mm is None:
            object.__setattr__(self, "surface_width_mm", self.grid_width_mm)
        if self.surface_height_mm is None:
            object.__setattr__(self, "surface_height_mm", self.grid_height_mm)
        if (
            self.surface_width_mm < self.grid_width_mm
            or self.surface_height_mm < self.grid_height_mm
        ):
            raise ValueError("surface smaller than the taxel grid")

    @property
    def n_taxels(self) -> int:
        return self.rows * self.cols

    @property
    def grid_width_mm(self) -> float:
        return self.cols * self.taxel_pitch_mm

    @property
    def grid_height_mm(self) -> float:
        return self.rows * self.taxel_pitch_mm

    @property
    def grid_origin_mm(self) -> tuple[float, float]:
        """Lower corner (x, y) of the taxel grid on the surface."""
        return (
            (self.surface_width_mm - self.grid_width_mm) / 2.0,
            (self.surface_height_mm - self.grid_height_mm) / 2.0,
        )

    def taxel_center_mm(self, row: int, col: int) -> tuple[float, float]:
        ox, oy = self.grid_origin_mm
        return (
            ox + (col + 0.5) * self.taxel_pitch_mm,
            oy + (row + 0.5) * self.taxel_pitch_mm,
        )

    def taxel_bounds_mm(self, row: int, col: int) -> tuple[float, float, float, float]:
        """Sensing square (x0, y0, x1, y1) of one taxel, margins excluded."""
        cx, cy = self.taxel_center_mm(row, col)
        h = self.taxel_size_mm / 2.0
        return (cx - h, cy - h, cx + h, cy + h)

    def check_taxel(self, row: int, col: int) -> None:
        if not (0 <= row < self.rows and 0 <= col < self.cols):
            raise IndexError(f"taxel ({row}, {col}) outside {self.rows}x{self.cols} grid")


@dataclass(frozen=True)
class ResistanceMatrix:
    """Per-taxel resistance state in ohms; OPEN (+inf) marks no contact."""

    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 2:
            raise ValueError("resistance grid must be 2-D")
        finite = values[np.isfinite(values)]
        if np.any(finite <= 0):
            raise ValueError("finite taxel resistances must be positive")
        if np.any(np.isnan(values)) or np.any(values == -math.inf):
            raise ValueError("resistances must be positive or OPEN")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @classmethod
    def all_open(cls, config: SensorConfig) -> "ResistanceMatrix":
        return cls(np.full((config.rows, config.cols), OPEN))

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    def with_taxel(self, row: int, col: int, r_ohm: float) -> "ResistanceMatrix":
        values = self.values.copy()
        values[row, col] = r_ohm
        return ResistanceMatrix(values)

    def matches(self, config: SensorConfig) -> bool:
        return self.shape == (config.rows, config.cols)


@dataclass(frozen=True)
class Frame:
    """One full scan: ADC counts plus (optionally) per-taxel sample instants."""

    t_start_us: int
    counts: np.ndarray
    per_taxel_time_us: np.ndarray | None = None

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.int64)
        if counts.ndim != 2:
            raise ValueError("counts must be a 2-D grid")
        if counts.min() < 0 or counts.max() > ADC_MAX_CODE:
            raise ValueError("ADC counts outside [0, 1023]")
        counts.setflags(write=False)
        object.__setattr__(self, "counts", counts)
        if self.per_taxel_time_us is not None:
            times = np.asarray(self.per_taxel_time_us, dtype=float)
            if times.shape != counts.shape:
                raise ValueError("per-taxel times must match the counts grid")
            flat = times.ravel()  # row-major scan order
            if np.any(np.diff(flat) <= 0):
                raise ValueError("per-taxel times must be strictly increasing in scan order")
            times.setflags(write=False)
            object.__setattr__(self, "per_taxel_time_us", times)

    @property
    def shape(self) -> tuple[int, int]:
        return self.counts.shape


def network_resistance_from_reading(tr: float, r_ref_ohm: float) -> float:
    """Invert the divider: R_network = R_ref * (1024/tr - 1).

    tr = 0 means no current flowed, i.e. an open network (returns OPEN).
    """
    if r_ref_ohm <= 0:
        raise ValueError("r_ref_ohm must be positive")
    if tr < 0 or tr > ADC_FULL_SCALE:
        raise ValueError(f"reading {tr} outside [0, {ADC_FULL_SCALE}]")
    if tr == 0:
        return OPEN
    return r_ref_ohm * (ADC_FULL_SCALE / tr - 1.0)


def reading_from_network_resistance(r_net_ohm: float, r_ref_ohm: float) -> int:
    """ADC code for a given series network resistance (OPEN reads 0).

    Full-scale is 1024 per the divider formula; emitted codes clamp to 1023
    as a 10-bit converter would.
    """
    if r_ref_ohm <= 0:
        raise ValueError("r_ref_ohm must be positive")
    if r_net_ohm < 0:
        raise ValueError("network resistance cannot be negative")
    ratio = r_ref_ohm / (r_ref_ohm + r_net_ohm)  # exact 0.0 for OPEN
    return quantize_code(ADC_FULL_SCALE * ratio)


def series_margin_counts(config: SensorConfig, row: int, col: int) -> tuple[int, int]:
    """Margin segments in series with taxel (row, col), 0-based indices.

    Returns (column-margins, row-margins): the column-margin count is the
    number of inter-column stripe segments crossed on the selected row stripe
    (col + 1, connector segment included) and the row-margin count likewise
    on the selected column stripe (row + 1). Their sum is the total series
    margin count used by the naive readout model.
    """
    config.check_taxel(row, col)
    return (col + 1, row + 1)


def _load_preset_dict(data: dict, name: str) -> SensorConfig:
    known = {f for f in SensorConfig.__dataclass_fields__}
    unknown = set(data) - known
    if unknown:
        raise ValueError(f"unknown preset keys: {sorted(unknown)}")
    return SensorConfig(**{**data, "name": data.get("name", name)})


def load_preset(name: str) -> SensorConfig:
    """Load a named preset ('4x4', '3x16', '8x8') or a path to a TOML file."""
    if name in PRESET_NAMES:
        path = resources.files("crossknit_sim").joinpath(f"presets/{name}.toml")
        data = tomllib.loads(path.read_text())
    else:
        try:
            with open(name, "rb") as fh:
                data = tomllib.load(fh)
        except FileNotFoundError:
            raise ValueError(
                f"unknown preset {name!r}; expected one of {PRESET_NAMES} or a TOML path"
            ) from None
    return _load_preset_dict(data, name)
