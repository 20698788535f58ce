/**
 * Heatmap model and painter. The model is pure (cell colors + ghost
 * outlines from the frame's event list) so it can be asserted in tests;
 * the painter just blits the model onto a canvas.
 */

import type { FrameInfo } from './protocol.js';
import { taxelRectPx, type SensorGeometry } from './geometry.js';

export const ADC_MAX = 1023;
export const BASE_COLOR = 'rgb(28,28,40)';
export const GHOST_OUTLINE = 'rgb(255,80,80)';

/** Dark blue -> cyan -> yellow ramp over the ADC range. */
export function colorForCode(code: number): string {
  if (code <= 0) return BASE_COLOR;
  const t = Math.min(code, ADC_MAX) / ADC_MAX;
  const r = Math.round(t < 0.5 ? 40 * t * 2 : 40 + (255 - 40) * (t - 0.5) * 2);
  const g = Math.round(60 + 180 * t);
  const b = Math.round(120 + 80 * (1 - t));
  return `rgb(${r},${g},${b})`;
}

export interface HeatmapCell {
  row: number;
  col: number;
  code: number;
  color: string;
  ghost: boolean;
}

export function heatmapModel(frame: FrameInfo): HeatmapCell[] {
  const ghostTaxels = new Set<string>();
  for (const event of frame.events ?? []) {
    if (!event.ghost) continue;
    for (const [i, j] of event.taxels) ghostTaxels.add(`${i},${j}`);
  }
  const cells: HeatmapCell[] = [];
  for (let i = 0; i < frame.rows; i++) {
    for (let j = 0; j < frame.cols; j++) {
      const code = frame.counts[i][j];
      cells.push({
        row: i,
        col: j,
        code,
        color: colorForCode(code),
        ghost: ghostTaxels.has(`${i},${j}`),
      });
    }
  }
  return cells;
}

export function drawHeatmap(
  ctx: CanvasRenderingContext2D,
  geom: SensorGeometry,
  cells: HeatmapCell[],
  canvasW: number,
  canvasH: number,
): void {
  ctx.fillStyle = 'rgb(16,16,24)';
  ctx.fillRect(0, 0, canvasW, canvasH);
  for (const cell of cells) {
    const rect = taxelRectPx(geom, canvasW, canvasH, cell.row, cell.col);
    ctx.fillStyle = cell.color;
    ctx.fillRect(rect.x, rect.y, rect.w, rect.h);
    if (cell.code > 0) {
      ctx.fillStyle = 'rgba(255,255,255,0.85)';
      ctx.font = '10px monospace';
      ctx.fillText(String(cell.code), rect.x + 3, rect.y + 12);
    }
    if (cell.ghost) {
      ctx.strokeStyle = GHOST_OUTLINE;
      ctx.lineWidth = 3;
      ctx.strokeRect(rect.x + 1.5, rect.y + 1.5, rect.w - 3, rect.h - 3);
    }
  }
}
