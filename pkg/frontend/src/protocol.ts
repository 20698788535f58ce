/**
 * JSON message schema shared with the simulator's WebSocket channel.
 * Every message carries a "type"; the server greets with a config command
 * and then streams frame / robot_state messages.
 */

export type RobotMode = 'none' | 'arm' | 'kuri';

export interface ConfigInfo {
  type: 'command';
  action: 'config';
  preset: string;
  rows: number;
  cols: number;
  taxel_pitch_mm: number;
  taxel_size_mm: number;
  surface_mm: [number, number];
  grid_origin_mm: [number, number];
  frame_period_us: number;
  robot_mode: RobotMode;
}

export interface ContactEventInfo {
  id: number;
  taxels: [number, number][];
  centroid_mm: [number, number];
  force_n: number | null;
  peak_reading: number;
  ghost: boolean;
  t_us: number;
}

export interface FrameInfo {
  type: 'frame';
  seq: number;
  t_start_us: number;
  rows: number;
  cols: number;
  counts: number[][];
  events?: ContactEventInfo[];
}

export interface ArmStateInfo {
  type: 'robot_state';
  mode: 'arm';
  t_us: number;
  ee_mm: [number, number, number];
  gripper: 'open' | 'closed';
  velocity_mm_s: [number, number, number];
  contact_mm: [number, number, number] | null;
  gesture: string;
}

export interface KuriStateInfo {
  type: 'robot_state';
  mode: 'kuri';
  t_us: number;
  pose_mm: [number, number];
  heading_rad: number;
  linear_mm_s: number;
  angular_rad_s: number;
  head_pitch: 'up' | 'forward' | 'down';
  head_yaw_index: number;
  sector: string | null;
}

export type RobotStateInfo = ArmStateInfo | KuriStateInfo;

export interface ErrorInfo {
  type: 'command';
  action: 'error';
  message: string;
}

export type ServerMessage = ConfigInfo | FrameInfo | RobotStateInfo | ErrorInfo;

export type ShapeSpec =
  | { kind: 'disk'; radius_mm: number }
  | { kind: 'square'; side_mm: number }
  | { kind: 'sphere'; radius_mm: number }
  | { kind: 'point' };

export interface PatchSpec {
  id: string;
  shape: ShapeSpec;
  center_mm: [number, number];
  force_n: number;
}

export function parseServerMessage(raw: string): ServerMessage | null {
  let data: unknown;
  try {
    data = JSON.parse(raw);
  } catch {
    return null;
  }
  if (typeof data !== 'object' || data === null) return null;
  const msg = data as Record<string, unknown>;
  switch (msg.type) {
    case 'frame':
      return Array.isArray(msg.counts) ? (msg as unknown as FrameInfo) : null;
    case 'robot_state':
      return msg.mode === 'arm' || msg.mode === 'kuri'
        ? (msg as unknown as RobotStateInfo)
        : null;
    case 'command':
      if (msg.action === 'config') return msg as unknown as ConfigInfo;
      if (msg.action === 'error') return msg as unknown as ErrorInfo;
      return null;
    default:
      return null;
  }
}

export function injectContactMessage(patches: PatchSpec[]): string {
  return JSON.stringify({ type: 'inject_contact', patches });
}

export function commandMessage(action: 'clear' | 'reset_robot'): string {
  return JSON.stringify({ type: 'command', action });
}
