"""Sparse goal reward plus force/touch shaping terms.

The reward has up to three components:

* ``r_d``      -- 0 when the block is within the success radius of the goal,
                  -1 otherwise.
* ``r_ft``     -- ``c_ft * I_ft`` where ``I_ft`` is -1 whenever the norm of
                  the wrist force reading crosses the trigger threshold.
* ``r_touch``  -- ``c_touch * I_touch`` where ``I_touch`` is 1 whenever either
                  fingertip reports contact above its threshold.

Four composite variants select which terms are active:

=========  ==============================
variant    composition
=========  ==============================
``r1``     r_d + r_ft + r_touch
``r2``     r_d + r_ft
``r3``     r_d + r_touch
``r4``     r_d
=========  ==============================

All threshold comparisons use ``>=``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

REWARD_VARIANTS = ("r1", "r2", "r3", "r4")


@dataclass
class RewardConfig:
    """Gains and trigger thresholds for the shaped reward."""

    variant: str = "r1"
    c_ft: float = 0.2
    sigma_ft: float = 50.0       # N, force-norm trigger
    c_touch: float = 0.2
    sigma_touch: float = 0.1     # N, fingertip trigger
    success_radius: float = 0.04  # m

    def __post_init__(self):
        if self.variant not in REWARD_VARIANTS:
            raise ValueError(f"unknown reward variant {self.variant!r}")
        if self.c_ft < 0 or self.c_touch < 0:
            raise ValueError("reward gains must be non-negative")
        if self.sigma_ft <= 0 or self.sigma_touch <= 0 or self.success_radius <= 0:
            raise ValueError("thresholds must be positive")


def r_d(achieved, goal, cfg) -> float:
    """Sparse goal reward: 0 within the success radius, -1 otherwise."""
    achieved = np.asarray(achieved, dtype=float)
    goal = np.asarray(goal, dtype=float)
    dist = float(np.linalg.norm(achieved - goal))
    return 0.0 if dist <= cfg.success_radius else -1.0


def indicator_ft(ft_force, cfg) -> float:
    """-1 when the force-vector norm reaches the trigger threshold, else 0."""
    amplitude = float(np.linalg.norm(np.asarray(ft_force, dtype=float)))
    return -1.0 if amplitude >= cfg.sigma_ft else 0.0


def indicator_touch(touch, cfg) -> float:
    """1 when any fingertip force reaches the trigger threshold, else 0."""
    strongest = float(np.max(np.asarray(touch, dtype=float)))
    return 1.0 if strongest >= cfg.sigma_touch else 0.0


def shaped_reward(variant, achieved, goal, ft_force, touch, cfg) -> float:
    """Composite reward for one of the four variants.

    The shaping terms depend only on the raw sensor readings, never on the
    goal, so hindsight relabeling leaves them untouched.
    """
    reward = r_d(achieved, goal, cfg)
    if variant == "r1":
        reward += cfg.c_ft * indicator_ft(ft_force, cfg)
        reward += cfg.c_touch * indicator_touch(touch, cfg)
    elif variant == "r2":
        reward += cfg.c_ft * indicator_ft(ft_force, cfg)
    elif variant == "r3":
        reward += cfg.c_touch * indicator_touch(touch, cfg)
    elif variant != "r4":
        raise ValueError(f"unknown reward variant {variant!r}")
    return reward
