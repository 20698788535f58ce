/**
 * Session state machine. Owns the socket, parses the stream into
 * UiSessionState, and exposes the single write path (inject/command).
 * Rendering subscribes via onChange; the app never mutates simulation
 * state except through messages.
 */

import { geometryFromConfig, type SensorGeometry } from './geometry.js';
import {
  commandMessage,
  parseServerMessage,
  type ConfigInfo,
  type FrameInfo,
  type RobotStateInfo,
} from './protocol.js';
import { TouchController, type TouchOptions } from './pointer.js';

export interface SocketLike {
  send(data: string): void;
  close(): void;
  set onmessage(cb: ((ev: { data: string }) => void) | null);
  set onopen(cb: (() => void) | null);
  set onclose(cb: (() => void) | null);
}

export type DisplayMode = 'heatmap' | 'events' | 'arm' | 'kuri';

export interface UiSessionState {
  endpoint: string;
  connected: boolean;
  preset: string;
  geometry: SensorGeometry | null;
  framePeriodUs: number;
  robotMode: string;
  mode: DisplayMode;
  lastFrame: FrameInfo | null;
  lastRobot: RobotStateInfo | null;
  frameCount: number;
  lastError: string;
}

export class ConsoleApp {
  readonly state: UiSessionState;
  readonly touch: TouchController;
  private socket: SocketLike | null = null;
  private listeners: Array<(state: UiSessionState) => void> = [];

  constructor(
    private readonly connectFn: (url: string) => SocketLike,
    endpoint: string,
    touchOptions: TouchOptions = {},
  ) {
    this.state = {
      endpoint,
      connected: false,
      preset: '',
      geometry: null,
      framePeriodUs: 0,
      robotMode: 'none',
      mode: 'heatmap',
      lastFrame: null,
      lastRobot: null,
      frameCount: 0,
      lastError: '',
    };
    this.touch = new TouchController({ send: (data) => this.send(data) }, touchOptions);
  }

  connect(): void {
    const socket = this.connectFn(this.state.endpoint);
    this.socket = socket;
    socket.onopen = () => {
      this.state.connected = true;
      this.emit();
    };
    socket.onclose = () => {
      this.state.connected = false;
      this.emit();
    };
    socket.onmessage = (ev) => this.handleRaw(ev.data);
  }

  disconnect(): void {
    this.socket?.close();
    this.socket = null;
  }

  onChange(cb: (state: UiSessionState) => void): void {
    this.listeners.push(cb);
  }

  private emit(): void {
    for (const cb of this.listeners) cb(this.state);
  }

  private send(data: string): void {
    this.socket?.send(data);
  }

  sendClear(): void {
    this.send(commandMessage('clear'));
  }

  sendResetRobot(): void {
    this.send(commandMessage('reset_robot'));
  }

  setMode(mode: DisplayMode): void {
    this.state.mode = mode;
    this.emit();
  }

  handleRaw(raw: string): void {
    const msg = parseServerMessage(raw);
    if (msg === null) {
      this.state.lastError = 'unparseable message';
      this.emit();
      return;
    }
    if (msg.type === 'frame') {
      this.state.lastFrame = msg;
      this.state.frameCount += 1;
    } else if (msg.type === 'robot_state') {
      this.state.lastRobot = msg;
    } else if (msg.action === 'config') {
      this.applyConfig(msg);
    } else {
      this.state.lastError = msg.message;
    }
    this.emit();
  }

  private applyConfig(cfg: ConfigInfo): void {
    this.state.preset = cfg.preset;
    this.state.geometry = geometryFromConfig(cfg);
    this.state.framePeriodUs = cfg.frame_period_us;
    this.state.robotMode = cfg.robot_mode;
    this.touch.geom = this.state.geometry;
  }
}
