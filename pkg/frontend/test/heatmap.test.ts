import { describe, expect, it } from 'vitest';

import { BASE_COLOR, colorForCode, heatmapModel } from '../src/heatmap.js';
import type { FrameInfo } from '../src/protocol.js';

function frameWith(counts: number[][], events: FrameInfo['events'] = []): FrameInfo {
  return {
    type: 'frame',
    seq: 1,
    t_start_us: 0,
    rows: counts.length,
    cols: counts[0].length,
    counts,
    events,
  };
}

describe('color ramp', () => {
  it('zero reads the base color', () => {
    expect(colorForCode(0)).toBe(BASE_COLOR);
  });

  it('saturated taxels get the top-of-scale color', () => {
    expect(colorForCode(1023)).toBe(colorForCode(2000));
    expect(colorForCode(1023)).not.toBe(colorForCode(512));
  });
});

describe('heatmap model', () => {
  it('all-zero frame renders uniformly', () => {
    const cells = heatmapModel(frameWith([[0, 0], [0, 0]]));
    expect(cells).toHaveLength(4);
    expect(new Set(cells.map((c) => c.color)).size).toBe(1);
    expect(cells.every((c) => !c.ghost)).toBe(true);
  });

  it('outlines ghost-flagged taxels', () => {
    const cells = heatmapModel(
      frameWith(
        [
          [0, 130, 300, 0],
          [0, 310, 320, 0],
          [0, 0, 0, 0],
          [0, 0, 0, 0],
        ],
        [
          {
            id: 0,
            taxels: [[0, 1]],
            centroid_mm: [60, 35],
            force_n: null,
            peak_reading: 130,
            ghost: true,
            t_us: 0,
          },
          {
            id: 1,
            taxels: [[0, 2], [1, 1], [1, 2]],
            centroid_mm: [72, 47],
            force_n: null,
            peak_reading: 320,
            ghost: false,
            t_us: 0,
          },
        ],
      ),
    );
    const ghost = cells.filter((c) => c.ghost);
    expect(ghost).toHaveLength(1);
    expect([ghost[0].row, ghost[0].col]).toEqual([0, 1]);
    const lit = cells.filter((c) => c.code > 0);
    expect(lit).toHaveLength(4);
  });
});
