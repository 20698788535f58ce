"""Temporal scanning: frame-rate model, scenario playback, sampling modes.

The multiplexers step through selections row-major; each taxel costs one
write delay plus one read delay, so a frame takes rows * cols * (t_write +
t_read). Playback uses rolling-shutter semantics by default: every taxel
is sampled at its own instant against the contact field interpolated
(zero-order hold) at that instant. A snapshot mode freezes the field at
the frame start instead, which is handy for deterministic comparisons.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .core import Frame, ResistanceMatrix, SensorConfig, load_preset, quantize_code
from .network import _MatrixNetwork, solve_full
from .pressure import (
    HysteresisState,
    PressureField,
    TransferParams,
    field_from_json,
    field_to_json,
    rasterize,
    resistance_grid,
    apply_hysteresis_drift,
)


@dataclass(frozen=True)
class ScanTiming:
    t_write_us: float = 27.2
    t_read_us: float = 400.0
    # Coarse stand-in for charge-sharing crosstalk: with read delays under
    # the settle threshold, part of the previously selected channel bleeds
    # into the reading. Off by default.
    model_settling: bool = False
    settle_threshold_us: float = 100.0

    def __post_init__(self):
        if self.t_write_us <= 0 or self.t_read_us <= 0:
            raise ValueError("write/read delays must be positive")

    @property
    def per_taxel_us(self) -> float:
        return self.t_write_us + self.t_read_us

    @property
    def settle_blend(self) -> float:
        if not self.model_settling or self.t_read_us >= self.settle_threshold_us:
            return 0.0
        return 0.5 * (1.0 - self.t_read_us / self.settle_threshold_us)

    @classmethod
    def from_config(cls, config: SensorConfig) -> "ScanTiming":
        return cls(t_write_us=config.t_write_us, t_read_us=config.t_read_us)


def frame_period_us(config: SensorConfig, timing: ScanTiming | None = None) -> float:
    timing = timing or ScanTiming.from_config(config)
    return config.rows * config.cols * timing.per_taxel_us


def frame_rate_hz(config: SensorConfig, timing: ScanTiming | None = None) -> float:
    return 1e6 / frame_period_us(config, timing)


@dataclass(frozen=True)
class Scenario:
    """Timestamped contact keyframes replayed against one sensor preset."""

    preset: str
    keyframes: tuple[PressureField, ...]
    duration_us: int
    name: str = ""

    def __post_init__(self):
        times = [kf.t_us for kf in self.keyframes]
        if any(t1 <= t0 for t0, t1 in zip(times, times[1:])):
            raise ValueError("keyframe timestamps must be strictly increasing")
        if self.duration_us <= 0:
            raise ValueError("scenario duration must be positive")

    def field_at(self, t_us: float) -> PressureField:
        """Zero-order hold: the most recent keyframe at or before t_us."""
        current = _EMPTY_FIELD
        for kf in self.keyframes:
            if kf.t_us <= t_us:
                current = kf
            else:
                break
        return current

    def config(self) -> SensorConfig:
        return load_preset(self.preset)


_EMPTY_FIELD = PressureField()


def scenario_to_json(scenario: Scenario) -> dict:
    return {
        "name": scenario.name,
        "preset": scenario.preset,
        "duration_us": scenario.duration_us,
        "keyframes": [field_to_json(kf) for kf in scenario.keyframes],
    }


def scenario_from_json(data: dict) -> Scenario:
    keyframes = tuple(field_from_json(kf) for kf in data.get("keyframes", []))
    duration = data.get("duration_us")
    if duration is None:
        duration = (keyframes[-1].t_us + 1) if keyframes else 1
    scenario = Scenario(
        preset=str(data["preset"]),
        keyframes=keyframes,
        duration_us=int(duration),
        name=str(data.get("name", "")),
    )
    config = scenario.config()  # unknown preset fails here
    for kf in keyframes:
        kf.check_bounds(config)
    return scenario


def load_scenario(path: str) -> Scenario:
    with open(path, "r", encoding="utf-8") as fh:
        return scenario_from_json(json.load(fh))


def save_scenario(path: str, scenario: Scenario) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(scenario_to_json(scenario), fh, indent=2)
        fh.write("\n")


class FrameSampler:
    """Samples frames from a time-varying contact field.

    Drives the per-frame work for both scenario playback and the live
    service; `field_fn(t_us)` supplies the contact field at any instant.
    """

    def __init__(
        self,
        config: SensorConfig,
        field_fn,
        params: TransferParams | None = None,
        timing: ScanTiming | None = None,
        snapshot: bool = False,
        hysteresis: HysteresisState | None = None,
    ):
        self.config = config
        self.field_fn = field_fn
        self.params = params or TransferParams()
        self.timing = timing or ScanTiming.from_config(config)
        self.snapshot = snapshot
        self.hysteresis = hysteresis
        self._t_us = 0.0
        self._last_field = None
        self._last_network = None
        self._prev_code = 0

    @property
    def t_us(self) -> float:
        return self._t_us

    def _network_for(self, field: PressureField) -> _MatrixNetwork:
        # ZOH hands back the same field object between keyframes, so the
        # edge arrays can be reused; the hysteresis filter changes the
        # matrix every step and disables the cache.
        if self.hysteresis is None and field is self._last_field:
            return self._last_network
        forces = rasterize(field, self.config, self.params)
        if self.hysteresis is not None:
            forces = apply_hysteresis_drift(
                self.hysteresis, forces, self.timing.per_taxel_us
            )
        matrix = ResistanceMatrix(resistance_grid(forces, self.params))
        network = _MatrixNetwork(self.config, matrix)
        self._last_field = field
        self._last_network = network
        return network

    def next_frame(self) -> Frame:
        config, timing = self.config, self.timing
        t_start = self._t_us
        counts = np.zeros((config.rows, config.cols), dtype=np.int64)
        times = np.zeros((config.rows, config.cols))
        blend = timing.settle_blend

        if self.snapshot:
            field = self.field_fn(t_start)
            network = self._network_for(field)
        k = 0
        for i in range(config.rows):
            for j in range(config.cols):
                t_sample = t_start + (k + 1) * timing.per_taxel_us
                if not self.snapshot:
                    network = self._network_for(self.field_fn(t_sample))
                code, _ = solve_full(network.topology(i, j))
                if blend > 0.0:
                    code = quantize_code((1.0 - blend) * code + blend * self._prev_code)
                self._prev_code = code
                counts[i, j] = code
                times[i, j] = t_sample
                k += 1
        self._t_us = t_start + config.n_taxels * timing.per_taxel_us
        return Frame(
            t_start_us=int(round(t_start)), counts=counts, per_taxel_time_us=times
        )


def run_scenario(
    scenario: Scenario,
    config: SensorConfig | None = None,
    params: TransferParams | None = None,
    timing: ScanTiming | None = None,
    snapshot: bool = False,
    hysteresis: HysteresisState | None = None,
) -> Iterator[Frame]:
    """Play a scenario, yielding one Frame per scan period until it ends."""
    config = config or scenario.config()
    sampler = FrameSampler(
        config,
        scenario.field_at,
        params=params,
        timing=timing,
        snapshot=snapshot,
        hysteresis=hysteresis,
    )
    while sampler.t_us < scenario.duration_us:
        yield sampler.next_frame()
