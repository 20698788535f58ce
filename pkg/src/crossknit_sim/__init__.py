"""Simulator for knitted crossbar tactile skins.

Covers the whole sensing chain: contact patches -> per-taxel forces ->
resistance matrix -> multiplexed network readout -> contact pipeline ->
robot commands, plus a streaming service for the browser console.
"""

from .core import (
    ADC_FULL_SCALE,
    ADC_MAX_CODE,
    OPEN,
    Frame,
    ResistanceMatrix,
    SensorConfig,
    is_open,
    load_preset,
    network_resistance_from_reading,
    reading_from_network_resistance,
    series_margin_counts,
)

__all__ = [
    "ADC_FULL_SCALE",
    "ADC_MAX_CODE",
    "OPEN",
    "Frame",
    "ResistanceMatrix",
    "SensorConfig",
    "is_open",
    "load_preset",
    "network_resistance_from_reading",
    "reading_from_network_resistance",
    "series_margin_counts",
]

__version__ = "0.1.0"
