/**
 * Scene models for the two robots. Models are pure data derived from the
 * latest robot_state message (what the tests assert); painters render them.
 */

import type { ArmStateInfo, KuriStateInfo } from './protocol.js';

export interface ArmScene {
  /** EE position projected top-down into the unit square */
  eeU: [number, number];
  zMm: number;
  gripper: 'open' | 'closed';
  speedMmS: number;
  contactU: [number, number] | null;
  gesture: string;
}

const ARM_RANGE_MM = 500; // workspace half-width used for the projection

export function armScene(state: ArmStateInfo): ArmScene {
  const toUnit = (v: number) => 0.5 + v / (2 * ARM_RANGE_MM);
  const speed = Math.hypot(...state.velocity_mm_s);
  return {
    eeU: [toUnit(state.ee_mm[0]), toUnit(state.ee_mm[1])],
    zMm: state.ee_mm[2],
    gripper: state.gripper,
    speedMmS: speed,
    contactU: state.contact_mm
      ? [toUnit(state.contact_mm[0]), toUnit(state.contact_mm[1])]
      : null,
    gesture: state.gesture,
  };
}

export interface KuriScene {
  poseU: [number, number];
  headingRad: number;
  /** the speed indicator shown on the dashboard */
  speedMmS: number;
  angularRadS: number;
  headPitch: 'up' | 'forward' | 'down';
  headYawIndex: number;
  sector: string | null;
}

const KURI_RANGE_MM = 2000;

export function kuriScene(state: KuriStateInfo): KuriScene {
  const toUnit = (v: number) => 0.5 + v / (2 * KURI_RANGE_MM);
  return {
    poseU: [toUnit(state.pose_mm[0]), toUnit(state.pose_mm[1])],
    headingRad: state.heading_rad,
    speedMmS: state.linear_mm_s,
    angularRadS: state.angular_rad_s,
    headPitch: state.head_pitch,
    headYawIndex: state.head_yaw_index,
    sector: state.sector,
  };
}

export function drawArmScene(
  ctx: CanvasRenderingContext2D,
  scene: ArmScene,
  w: number,
  h: number,
): void {
  ctx.fillStyle = 'rgb(16,16,24)';
  ctx.fillRect(0, 0, w, h);
  const [ux, uy] = scene.eeU;
  const x = ux * w;
  const y = uy * h;
  // cylinder sleeve rendered as a ring around the EE
  ctx.strokeStyle = 'rgb(90,90,130)';
  ctx.lineWidth = 6;
  ctx.beginPath();
  ctx.arc(x, y, 26, 0, Math.PI * 2);
  ctx.stroke();
  ctx.fillStyle = scene.gripper === 'closed' ? 'rgb(255,180,60)' : 'rgb(120,220,160)';
  ctx.beginPath();
  ctx.arc(x, y, 10, 0, Math.PI * 2);
  ctx.fill();
  if (scene.contactU) {
    ctx.fillStyle = 'rgb(255,80,80)';
    ctx.beginPath();
    ctx.arc(scene.contactU[0] * w, scene.contactU[1] * h, 5, 0, Math.PI * 2);
    ctx.fill();
  }
  ctx.fillStyle = 'rgb(220,220,230)';
  ctx.font = '12px monospace';
  ctx.fillText(
    `gripper ${scene.gripper}  |v| ${scene.speedMmS.toFixed(0)} mm/s  z ${scene.zMm.toFixed(0)}`,
    8,
    h - 10,
  );
}

export function drawKuriScene(
  ctx: CanvasRenderingContext2D,
  scene: KuriScene,
  w: number,
  h: number,
): void {
  ctx.fillStyle = 'rgb(16,16,24)';
  ctx.fillRect(0, 0, w, h);
  const x = scene.poseU[0] * w;
  const y = scene.poseU[1] * h;
  ctx.strokeStyle = 'rgb(90,90,130)';
  ctx.lineWidth = 2;
  ctx.beginPath();
  ctx.arc(x, y, 16, 0, Math.PI * 2);
  ctx.stroke();
  ctx.beginPath();
  ctx.moveTo(x, y);
  ctx.lineTo(x + 24 * Math.cos(scene.headingRad), y + 24 * Math.sin(scene.headingRad));
  ctx.stroke();
  // sector overlay around the body
  if (scene.sector) {
    ctx.fillStyle = 'rgba(255,120,80,0.8)';
    ctx.font = '12px monospace';
    ctx.fillText(`contact: ${scene.sector}`, 8, 16);
  }
  // speed indicator bar
  const barW = Math.min(scene.speedMmS / 400, 1) * (w - 16);
  ctx.fillStyle = scene.speedMmS === 0 ? 'rgb(255,80,80)' : 'rgb(120,220,160)';
  ctx.fillRect(8, h - 22, barW, 8);
  ctx.fillStyle = 'rgb(220,220,230)';
  ctx.font = '12px monospace';
  ctx.fillText(
    `v ${scene.speedMmS.toFixed(0)} mm/s  head ${scene.headPitch}/${scene.headYawIndex}`,
    8,
    h - 30,
  );
}
