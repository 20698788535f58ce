/** DOM bootstrap: wires the session to canvases and controls. */

import { ConsoleApp, type DisplayMode, type SocketLike } from './app.js';
import { drawHeatmap, heatmapModel } from './heatmap.js';
import { armScene, drawArmScene, drawKuriScene, kuriScene } from './robotScene.js';

const canvas = document.getElementById('view') as HTMLCanvasElement;
const ctx = canvas.getContext('2d')!;
const slider = document.getElementById('force') as HTMLInputElement;
const sliderLabel = document.getElementById('force-label') as HTMLSpanElement;
const status = document.getElementById('status') as HTMLSpanElement;
const eventLog = document.getElementById('events') as HTMLPreElement;

const endpoint = `ws://${location.host}/`;
const app = new ConsoleApp(
  (url) => new WebSocket(url) as unknown as SocketLike,
  endpoint,
);

app.touch.sliderForceN = Number(slider.value);
slider.addEventListener('input', () => {
  app.touch.sliderForceN = Number(slider.value);
  sliderLabel.textContent = `${slider.value} N`;
});

for (const button of document.querySelectorAll<HTMLButtonElement>('[data-mode]')) {
  button.addEventListener('click', () => app.setMode(button.dataset.mode as DisplayMode));
}
document.getElementById('clear')!.addEventListener('click', () => app.sendClear());
document.getElementById('reset')!.addEventListener('click', () => app.sendResetRobot());

canvas.addEventListener('pointerdown', (ev) => {
  canvas.setPointerCapture(ev.pointerId);
  app.touch.pointerDown(ev.offsetX, ev.offsetY, canvas.width, canvas.height);
});
canvas.addEventListener('pointermove', (ev) => {
  app.touch.pointerMove(ev.offsetX, ev.offsetY, canvas.width, canvas.height);
});
for (const evName of ['pointerup', 'pointercancel', 'pointerleave'] as const) {
  canvas.addEventListener(evName, () => app.touch.pointerUp());
}

function render(): void {
  const { geometry, lastFrame, lastRobot, mode, connected, preset, frameCount } = app.state;
  status.textContent = connected
    ? `${preset} · frame ${frameCount} · ${mode}`
    : 'connecting…';
  if (mode === 'heatmap' && geometry && lastFrame) {
    drawHeatmap(ctx, geometry, heatmapModel(lastFrame), canvas.width, canvas.height);
  } else if (mode === 'arm' && lastRobot?.mode === 'arm') {
    drawArmScene(ctx, armScene(lastRobot), canvas.width, canvas.height);
  } else if (mode === 'kuri' && lastRobot?.mode === 'kuri') {
    drawKuriScene(ctx, kuriScene(lastRobot), canvas.width, canvas.height);
  } else if (mode === 'events' && lastFrame) {
    const lines = (lastFrame.events ?? []).map(
      (e) =>
        `#${e.id} @(${e.centroid_mm[0].toFixed(1)}, ${e.centroid_mm[1].toFixed(1)}) ` +
        `${e.taxels.length} taxel(s) peak ${e.peak_reading}${e.ghost ? ' GHOST' : ''}`,
    );
    eventLog.textContent = lines.join('\n') || '(no contacts)';
  }
  eventLog.style.display = mode === 'events' ? 'block' : 'none';
  canvas.style.display = mode === 'events' ? 'none' : 'block';
}

function loop(): void {
  app.touch.tick(); // dwell boost while holding
  render();
  requestAnimationFrame(loop);
}

// stateless across reconnects: drop everything, rebuild from the greeting
let reconnectTimer: number | null = null;
app.onChange((state) => {
  if (!state.connected && reconnectTimer === null) {
    reconnectTimer = window.setTimeout(() => {
      reconnectTimer = null;
      app.connect();
    }, 1000);
  }
});

app.connect();
requestAnimationFrame(loop);
