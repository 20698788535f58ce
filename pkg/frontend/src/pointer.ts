/**
 * Turns pointer gestures on the heatmap canvas into inject_contact
 * messages: press emits a disk patch under the cursor, dragging re-aims it
 * (throttled, but at 30 Hz or better), holding boosts the force toward the
 * slider setting, release clears the injection.
 */

import { canvasToSensorMm, type SensorGeometry } from './geometry.js';
import { injectContactMessage, type PatchSpec } from './protocol.js';

export interface MessageSink {
  send(data: string): void;
}

export interface TouchOptions {
  radiusMm?: number;
  /** newtons applied at first contact before the dwell boost kicks in */
  initialForceN?: number;
  /** dwell boost rate, N/s of hold time */
  boostNPerS?: number;
  minSendIntervalMs?: number;
  now?: () => number;
}

export class TouchController {
  private readonly sink: MessageSink;
  private readonly radiusMm: number;
  private readonly initialForceN: number;
  private readonly boostNPerS: number;
  private readonly minSendIntervalMs: number;
  private readonly now: () => number;

  geom: SensorGeometry | null = null;
  sliderForceN = 20;

  private pressed = false;
  private pressStartMs = 0;
  private lastSentMs = -Infinity;
  private lastCenter: [number, number] = [0, 0];

  constructor(sink: MessageSink, opts: TouchOptions = {}) {
    this.sink = sink;
    this.radiusMm = opts.radiusMm ?? 15;
    this.initialForceN = opts.initialForceN ?? 8;
    this.boostNPerS = opts.boostNPerS ?? 12;
    this.minSendIntervalMs = opts.minSendIntervalMs ?? 1000 / 45;
    this.now = opts.now ?? (() => performance.now());
  }

  /** Force after holding for heldMs, capped by the slider. */
  currentForceN(heldMs: number): number {
    const boosted = this.initialForceN + (this.boostNPerS * heldMs) / 1000;
    return Math.min(this.sliderForceN, boosted);
  }

  private patch(heldMs: number): PatchSpec {
    return {
      id: 'pointer',
      shape: { kind: 'disk', radius_mm: this.radiusMm },
      center_mm: this.lastCenter,
      force_n: this.currentForceN(heldMs),
    };
  }

  pointerDown(px: number, py: number, canvasW: number, canvasH: number): void {
    if (!this.geom || this.sliderForceN <= 0) return;
    this.pressed = true;
    this.pressStartMs = this.now();
    this.lastCenter = canvasToSensorMm(this.geom, canvasW, canvasH, px, py);
    this.lastSentMs = this.now();
    this.sink.send(injectContactMessage([this.patch(0)]));
  }

  pointerMove(px: number, py: number, canvasW: number, canvasH: number): void {
    if (!this.pressed || !this.geom) return;
    const t = this.now();
    this.lastCenter = canvasToSensorMm(this.geom, canvasW, canvasH, px, py);
    if (t - this.lastSentMs < this.minSendIntervalMs) return;
    this.lastSentMs = t;
    this.sink.send(injectContactMessage([this.patch(t - this.pressStartMs)]));
  }

  /** Re-send while holding still so the dwell boost reaches the server. */
  tick(): void {
    if (!this.pressed || !this.geom) return;
    const t = this.now();
    if (t - this.lastSentMs < this.minSendIntervalMs) return;
    this.lastSentMs = t;
    this.sink.send(injectContactMessage([this.patch(t - this.pressStartMs)]));
  }

  pointerUp(): void {
    if (!this.pressed) return;
    this.pressed = false;
    this.sink.send(injectContactMessage([]));
  }

  get isPressed(): boolean {
    return this.pressed;
  }
}
