import { describe, expect, it } from 'vitest';

import { TouchController } from '../src/pointer.js';
import type { SensorGeometry } from '../src/geometry.js';

const GEOM_4X4: SensorGeometry = {
  rows: 4,
  cols: 4,
  pitchMm: 25,
  taxelSizeMm: 22,
  surfaceMm: [145, 145],
  originMm: [22.5, 22.5],
};

function makeController(slider = 20) {
  const sent: string[] = [];
  let nowMs = 0;
  const touch = new TouchController(
    { send: (d) => sent.push(d) },
    { now: () => nowMs },
  );
  touch.geom = GEOM_4X4;
  touch.sliderForceN = slider;
  return {
    touch,
    sent,
    tickClock: (ms: number) => {
      nowMs += ms;
    },
  };
}

describe('touch controller', () => {
  it('click at the canvas center emits a 15 mm disk at (72.5, 72.5)', () => {
    const { touch, sent } = makeController();
    touch.pointerDown(290, 290, 580, 580);
    expect(sent).toHaveLength(1);
    const msg = JSON.parse(sent[0]);
    expect(msg.type).toBe('inject_contact');
    expect(msg.patches).toHaveLength(1);
    expect(msg.patches[0].shape).toEqual({ kind: 'disk', radius_mm: 15 });
    expect(msg.patches[0].center_mm).toEqual([72.5, 72.5]);
    expect(msg.patches[0].force_n).toBeGreaterThan(0);
  });

  it('slider at zero emits nothing', () => {
    const { touch, sent } = makeController(0);
    touch.pointerDown(290, 290, 580, 580);
    touch.pointerUp();
    expect(sent).toHaveLength(0);
  });

  it('drags re-aim the patch at 30 Hz or better', () => {
    const { touch, sent, tickClock } = makeController();
    touch.pointerDown(0, 290, 580, 580);
    // one second of 60 Hz pointer events across the canvas
    for (let k = 0; k < 60; k++) {
      tickClock(1000 / 60);
      touch.pointerMove(k * 9, 290, 580, 580);
    }
    expect(sent.length).toBeGreaterThanOrEqual(30);
    const last = JSON.parse(sent[sent.length - 1]);
    expect(last.patches[0].center_mm[0]).toBeGreaterThan(100);
  });

  it('holding boosts force up to the slider setting', () => {
    const { touch, sent, tickClock } = makeController(50);
    touch.pointerDown(290, 290, 580, 580);
    const first = JSON.parse(sent[0]).patches[0].force_n;
    for (let k = 0; k < 100; k++) {
      tickClock(50);
      touch.tick();
    }
    const last = JSON.parse(sent[sent.length - 1]).patches[0].force_n;
    expect(first).toBeLessThan(last);
    expect(last).toBe(50);
  });

  it('release clears the injection', () => {
    const { touch, sent } = makeController();
    touch.pointerDown(290, 290, 580, 580);
    touch.pointerUp();
    const last = JSON.parse(sent[sent.length - 1]);
    expect(last.patches).toEqual([]);
    expect(touch.isPressed).toBe(false);
  });
});
