"""Deterministic quasi-static pushing simulator with force and touch sensing.

A point gripper under displacement control pushes a square block across a
table. Contacts use penalty springs:

* table:  normal force ``k_table * penetration`` once the gripper sphere dips
  below the surface; the gripper is then held at the surface but keeps the
  force reading for the step.
* block:  the gripper disc against the yaw-rotated block square; contact force
  is ``k_block * overlap`` and the block translates to resolve the overlap
  only when that force beats the Coulomb friction resistance
  ``mu * m * g``. Yaw couples in through a single invented gain
  (``rotation_gain``), purely so that rolling/scrolling failure modes exist.

Both fingertip touch channels report the same contact magnitude (single
contact model). All threshold comparisons use ``>=``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import rewards

GRAVITY = 9.81  # m/s^2


@dataclass
class SimConfig:
    dt: float = 0.1                   # s per control step
    max_steps: int = 200
    block_half_extent: float = 0.035  # m, half side of the square block
    gripper_radius: float = 0.01      # m
    workspace_min: tuple = (0.0, 0.0, 0.0)
    workspace_max: tuple = (0.6, 0.6, 0.3)
    spawn_min: float = 0.1            # m, block/goal spawn square
    spawn_max: float = 0.5
    min_block_goal_distance: float = 0.08
    success_radius: float = 0.04
    k_table: float = 10000.0          # N/m, 5 mm penetration -> 50 N
    k_block: float = 1000.0           # N/m, 0.1 mm overlap -> touch trigger
    friction_coefficient: float = 0.03
    block_mass: float = 0.5           # kg
    sigma_ft: float = 50.0            # N, force-norm trigger
    sigma_touch: float = 0.1          # N, fingertip trigger
    pose_noise_std: float = 0.0       # m, 0.02 emulates vision error
    rotation_gain: float = 5.0        # rad/m^2, invented yaw coupling
    gripper_home: tuple = (0.3, 0.3, 0.05)

    def __post_init__(self):
        positives = (
            self.dt, self.block_half_extent, self.gripper_radius,
            self.k_table, self.k_block, self.block_mass,
            self.sigma_ft, self.sigma_touch, self.success_radius,
            self.friction_coefficient,
        )
        if any(v <= 0 for v in positives):
            raise ValueError("lengths, stiffnesses and thresholds must be positive")
        if self.max_steps <= 0:
            raise ValueError("max_steps must be positive")
        if self.spawn_max <= self.spawn_min:
            raise ValueError("empty spawn region")
        if self.success_radius >= self.spawn_max - self.spawn_min:
            raise ValueError("success radius must be smaller than the spawn extent")
        if self.pose_noise_std < 0:
            raise ValueError("pose_noise_std must be non-negative")


@dataclass
class SimState:
    """Full physical state plus the latest sensor readings."""

    gripper_pos: np.ndarray           # (3,) m
    gripper_vel: np.ndarray           # (3,) m/s, finite difference of last step
    block_pose: np.ndarray            # (3,) x, y, yaw
    goal: np.ndarray                  # (2,) m
    ft_force: np.ndarray              # (3,) N, reaction on the gripper
    touch: np.ndarray                 # (2,) N, fingertip contact magnitudes
    step_index: int = 0
    estopped: bool = False
    pose_estimate: np.ndarray | None = None  # filtered block pose, see observe()

    def copy(self) -> "SimState":
        return SimState(
            gripper_pos=self.gripper_pos.copy(),
            gripper_vel=self.gripper_vel.copy(),
            block_pose=self.block_pose.copy(),
            goal=self.goal.copy(),
            ft_force=self.ft_force.copy(),
            touch=self.touch.copy(),
            step_index=self.step_index,
            estopped=self.estopped,
            pose_estimate=None if self.pose_estimate is None else self.pose_estimate.copy(),
        )


OBSERVATION_DIM = 16
GOAL_DIM = 2


def is_success(achieved, goal, config: SimConfig) -> bool:
    """True when the block sits within the success radius of the goal."""
    achieved = np.asarray(achieved, dtype=float)
    goal = np.asarray(goal, dtype=float)
    return float(np.linalg.norm(achieved - goal)) <= config.success_radius


def filtered_block_pose(previous_estimate, measured, touch_indicator):
    """Tactile-gated pose filter.

    Without fingertip contact the block cannot have moved, so the previous
    estimate is kept; on contact the fresh measurement is trusted. At episode
    start (no previous estimate) the measurement is taken unconditionally.
    """
    measured = np.asarray(measured, dtype=float)
    if previous_estimate is None:
        return measured.copy()
    if touch_indicator:
        return measured.copy()
    return np.asarray(previous_estimate, dtype=float).copy()


def _rot(yaw):
    c, s = np.cos(yaw), np.sin(yaw)
    return np.array([[c, -s], [s, c]])


def _disc_square_overlap(center, block_pose, half_extent, radius):
    """Minimal-translation overlap of the gripper disc and the block square.

    Returns ``None`` when there is no overlap, else ``(overlap, n_world,
    contact_local)`` where ``n_world`` is the unit direction the block must
    translate (from the gripper into the block) and ``contact_local`` is the
    contact point in the block frame.
    """
    rot = _rot(block_pose[2])
    p = rot.T @ (np.asarray(center, dtype=float) - block_pose[:2])
    q = np.clip(p, -half_extent, half_extent)
    diff = p - q
    dist = float(np.hypot(diff[0], diff[1]))
    if dist > 0.0:
        if dist >= radius:
            return None
        overlap = radius - dist
        n_local = -diff / dist
        contact_local = q
    else:
        # disc centre inside the square: exit through the nearest face
        gaps = half_extent - np.abs(p)
        axis = int(np.argmin(gaps))
        overlap = radius + float(gaps[axis])
        sign = 1.0 if p[axis] >= 0 else -1.0
        n_local = np.zeros(2)
        n_local[axis] = -sign
        contact_local = p.copy()
        contact_local[axis] = sign * half_extent
    return overlap, rot @ n_local, contact_local


def _cross2(a, b) -> float:
    return float(a[0] * b[1] - a[1] * b[0])


class PushEnv:
    """Seeded pushing environment; stepping is deterministic given the seed."""

    def __init__(self, config: SimConfig | None = None, seed=None):
        self.config = config if config is not None else SimConfig()
        self.rng = np.random.default_rng(seed)
        self.state: SimState | None = None

    def reset(self) -> SimState:
        c = self.config
        block_xy = self.rng.uniform(c.spawn_min, c.spawn_max, size=2)
        yaw = self.rng.uniform(0.0, 2.0 * np.pi)
        for _ in range(1000):
            goal = self.rng.uniform(c.spawn_min, c.spawn_max, size=2)
            if np.linalg.norm(goal - block_xy) >= c.min_block_goal_distance:
                break
        else:
            raise RuntimeError(
                "could not sample a goal far enough from the block; "
                "spawn region and min_block_goal_distance are inconsistent")
        self.state = SimState(
            gripper_pos=np.array(c.gripper_home, dtype=float),
            gripper_vel=np.zeros(3),
            block_pose=np.array([block_xy[0], block_xy[1], yaw]),
            goal=goal,
            ft_force=np.zeros(3),
            touch=np.zeros(2),
        )
        return self.state

    def step(self, displacement) -> SimState:
        state = self.state
        c = self.config
        if state is None:
            raise RuntimeError("step() before reset()")
        if state.estopped:
            raise RuntimeError("cannot step an emergency-stopped episode")
        if state.step_index >= c.max_steps:
            raise RuntimeError("episode already ran its maximum number of steps")
        disp = np.asarray(displacement, dtype=float)
        if disp.shape != (3,):
            raise ValueError(f"displacement must be a 3-vector, got shape {disp.shape}")

        old_pos = state.gripper_pos
        pos = np.clip(old_pos + disp,
                      np.asarray(c.workspace_min), np.asarray(c.workspace_max))
        ft = np.zeros(3)
        touch = np.zeros(2)

        # table contact: force from the commanded penetration, then hold at surface
        if pos[2] < c.gripper_radius:
            penetration = c.gripper_radius - pos[2]
            ft[2] = c.k_table * penetration
            pos[2] = c.gripper_radius

        # block contact (only below the block's top face)
        block_pose = state.block_pose.copy()
        if pos[2] < 2.0 * c.block_half_extent:
            contact = _disc_square_overlap(
                pos[:2], block_pose, c.block_half_extent, c.gripper_radius)
            if contact is not None:
                overlap, n_world, contact_local = contact
                f_contact = c.k_block * overlap
                touch[:] = f_contact
                ft[:2] -= n_world * f_contact
                resistance = c.friction_coefficient * c.block_mass * GRAVITY
                if f_contact > resistance:
                    move = overlap * n_world
                    arm = _rot(block_pose[2]) @ contact_local
                    block_pose[:2] += move
                    block_pose[2] += c.rotation_gain * _cross2(arm, move)

        self.state = SimState(
            gripper_pos=pos,
            gripper_vel=(pos - old_pos) / c.dt,
            block_pose=block_pose,
            goal=state.goal.copy(),
            ft_force=ft,
            touch=touch,
            step_index=state.step_index + 1,
            estopped=False,
            pose_estimate=None if state.pose_estimate is None
            else state.pose_estimate.copy(),
        )
        return self.state

    def mark_estopped(self):
        self.state.estopped = True

    def observe(self):
        """Agent-facing observation; returns (observation, achieved, desired).

        Layout (16 slots): gripper position (3), gripper velocity (3), block
        pose (3), block-minus-gripper xy plus gripper z (3), force indicator
        (1), fingertip touch indicators (2), block-goal distance (1).
        """
        state = self.state
        c = self.config
        if state is None:
            raise RuntimeError("observe() before reset()")
        touch_ind = 1 if rewards.indicator_touch(state.touch, c) else 0
        if c.pose_noise_std > 0:
            measured = state.block_pose.copy()
            measured[:2] += self.rng.normal(0.0, c.pose_noise_std, size=2)
            estimate = filtered_block_pose(state.pose_estimate, measured, touch_ind)
        else:
            estimate = state.block_pose.copy()
        state.pose_estimate = estimate

        gp = state.gripper_pos
        i_ft = rewards.indicator_ft(state.ft_force, c)
        touch_slots = (state.touch >= c.sigma_touch).astype(float)
        distance = float(np.linalg.norm(estimate[:2] - state.goal))
        obs = np.concatenate([
            gp,
            state.gripper_vel,
            estimate,
            [estimate[0] - gp[0], estimate[1] - gp[1], gp[2]],
            [i_ft],
            touch_slots,
            [distance],
        ])
        return obs, estimate[:2].copy(), state.goal.copy()
