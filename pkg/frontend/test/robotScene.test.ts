import { describe, expect, it } from 'vitest';

import { armScene, kuriScene } from '../src/robotScene.js';
import type { ArmStateInfo, KuriStateInfo } from '../src/protocol.js';

function armState(overrides: Partial<ArmStateInfo> = {}): ArmStateInfo {
  return {
    type: 'robot_state',
    mode: 'arm',
    t_us: 0,
    ee_mm: [0, 0, 500],
    gripper: 'open',
    velocity_mm_s: [0, 0, 0],
    contact_mm: null,
    gesture: 'none',
    ...overrides,
  };
}

describe('arm scene', () => {
  it('is static when idle', () => {
    const scene = armScene(armState());
    expect(scene.speedMmS).toBe(0);
    expect(scene.eeU).toEqual([0.5, 0.5]);
    expect(scene.contactU).toBeNull();
  });

  it('reflects a gripper toggle from a grab', () => {
    const before = armScene(armState({ gesture: 'push' }));
    const after = armScene(armState({ gripper: 'closed', gesture: 'grab' }));
    expect(before.gripper).toBe('open');
    expect(after.gripper).toBe('closed');
  });

  it('marks the contact point on the sleeve', () => {
    const scene = armScene(armState({ contact_mm: [30, 0, 80] }));
    expect(scene.contactU).not.toBeNull();
    expect(scene.contactU![0]).toBeGreaterThan(0.5);
  });
});

describe('kuri scene', () => {
  it('carries the head pose and sector overlay', () => {
    const state: KuriStateInfo = {
      type: 'robot_state',
      mode: 'kuri',
      t_us: 0,
      pose_mm: [100, -50],
      heading_rad: 0.3,
      linear_mm_s: 250,
      angular_rad_s: -0.8,
      head_pitch: 'up',
      head_yaw_index: 7,
      sector: 'left',
    };
    const scene = kuriScene(state);
    expect(scene.speedMmS).toBe(250);
    expect(scene.headPitch).toBe('up');
    expect(scene.headYawIndex).toBe(7);
    expect(scene.sector).toBe('left');
  });
});
