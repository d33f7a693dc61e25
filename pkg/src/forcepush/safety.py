"""Safe-control measures: corrective force feedback, speed cap, emergency stop.

Pipeline order during rollout is fixed as

    policy + noise -> corrective_action -> clamp_displacement -> sim step
                   -> estop_check

The corrective term adds ``k_ft * F`` to the action; the measured reaction
force points away from the contact, so the offset is a compliant retreat.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

ACTION_SCALE = 0.01  # m of displacement per unit action per step


@dataclass
class SafetyConfig:
    k_ft: float = 0.002              # action units per N
    v_max: float = 0.1               # m/s end-effector speed cap
    estop_force_threshold: float = 100.0  # N
    action_scale: float = ACTION_SCALE
    corrective_enabled: bool = True
    speed_cap_enabled: bool = True
    estop_enabled: bool = True

    def __post_init__(self):
        if self.k_ft < 0:
            raise ValueError("k_ft must be non-negative")
        if self.v_max <= 0 or self.estop_force_threshold <= 0 or self.action_scale <= 0:
            raise ValueError("v_max, estop threshold and action scale must be positive")


def corrective_action(action, ft_force, k_ft: float) -> np.ndarray:
    """Add the compliant retreat offset ``k_ft * F`` to the action."""
    action = np.asarray(action, dtype=float)
    ft_force = np.asarray(ft_force, dtype=float)
    return action + k_ft * ft_force


def clamp_displacement(action, dt: float, v_max: float,
                       action_scale: float = ACTION_SCALE) -> np.ndarray:
    """Scale the action to metres and cap the end-effector speed.

    The nominal action range [-1, 1] maps to ``action_scale`` metres per
    step; displacements whose implied speed exceeds ``v_max`` are rescaled
    to exactly ``v_max * dt`` preserving direction.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    delta = np.asarray(action, dtype=float) * action_scale
    norm = float(np.linalg.norm(delta))
    if norm / dt > v_max:
        delta = delta * (v_max * dt / norm)
    return delta


def estop_check(ft_force, threshold: float) -> bool:
    """True when the force-vector norm reaches the emergency-stop threshold."""
    return float(np.linalg.norm(np.asarray(ft_force, dtype=float))) >= threshold
