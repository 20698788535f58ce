/**
 * Mapping between canvas pixels and sensor-surface millimeters. The canvas
 * always shows the whole swatch, so pixel -> mm is a plain scale per axis.
 */

import type { ConfigInfo } from './protocol.js';

export interface SensorGeometry {
  rows: number;
  cols: number;
  pitchMm: number;
  taxelSizeMm: number;
  surfaceMm: [number, number];
  originMm: [number, number];
}

export function geometryFromConfig(cfg: ConfigInfo): SensorGeometry {
  return {
    rows: cfg.rows,
    cols: cfg.cols,
    pitchMm: cfg.taxel_pitch_mm,
    taxelSizeMm: cfg.taxel_size_mm,
    surfaceMm: cfg.surface_mm,
    originMm: cfg.grid_origin_mm,
  };
}

export function canvasToSensorMm(
  geom: SensorGeometry,
  canvasW: number,
  canvasH: number,
  px: number,
  py: number,
): [number, number] {
  return [
    (px / canvasW) * geom.surfaceMm[0],
    (py / canvasH) * geom.surfaceMm[1],
  ];
}

export function taxelCenterMm(geom: SensorGeometry, row: number, col: number): [number, number] {
  return [
    geom.originMm[0] + (col + 0.5) * geom.pitchMm,
    geom.originMm[1] + (row + 0.5) * geom.pitchMm,
  ];
}

export interface CanvasRect {
  x: number;
  y: number;
  w: number;
  h: number;
}

/** Pixel rectangle of one taxel's sensing square. */
export function taxelRectPx(
  geom: SensorGeometry,
  canvasW: number,
  canvasH: number,
  row: number,
  col: number,
): CanvasRect {
  const sx = canvasW / geom.surfaceMm[0];
  const sy = canvasH / geom.surfaceMm[1];
  const [cx, cy] = taxelCenterMm(geom, row, col);
  const half = geom.taxelSizeMm / 2;
  return {
    x: (cx - half) * sx,
    y: (cy - half) * sy,
    w: geom.taxelSizeMm * sx,
    h: geom.taxelSizeMm * sy,
  };
}
