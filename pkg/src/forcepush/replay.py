"""Episode replay storage and hindsight goal relabeling.

Transitions keep their raw sensor readings (force vector and fingertip
magnitudes) so that relabeling can recompute the reward exactly without
re-simulation. The goal test uses ``next_achieved_goal`` -- the block
position that resulted from the action.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, replace

import numpy as np

from .rewards import RewardConfig, shaped_reward

HER_STRATEGIES = ("final", "future")


@dataclass
class Transition:
    observation: np.ndarray        # (16,)
    next_observation: np.ndarray   # (16,)
    action: np.ndarray             # (3,), executed action in [-1, 1]
    goal: np.ndarray               # (2,)
    achieved_goal: np.ndarray      # (2,)
    next_achieved_goal: np.ndarray  # (2,)
    ft_force: np.ndarray           # (3,) N
    touch: np.ndarray              # (2,) N
    reward: float
    terminal: bool = False         # emergency stop only


def her_relabel(episode, t: int, strategy: str, rng,
                reward_cfg: RewardConfig) -> Transition:
    """Relabel transition ``t`` of an episode with a hindsight goal.

    ``final`` takes the goal actually achieved at the end of the episode;
    ``future`` samples it uniformly from step ``t`` onwards. The shaping
    terms depend only on the stored sensor readings, so only the sparse
    goal component of the reward can change.
    """
    if t >= len(episode):
        raise IndexError(f"step {t} out of range for a {len(episode)}-step episode")
    if strategy == "final":
        new_goal = episode[-1].next_achieved_goal
    elif strategy == "future":
        source = int(rng.integers(t, len(episode)))
        new_goal = episode[source].next_achieved_goal
    else:
        raise ValueError(f"unknown HER strategy {strategy!r}")
    tr = episode[t]
    new_goal = np.array(new_goal, dtype=float)
    new_reward = shaped_reward(reward_cfg.variant, tr.next_achieved_goal, new_goal,
                               tr.ft_force, tr.touch, reward_cfg)
    return replace(tr, goal=new_goal, reward=float(new_reward))


class ReplayBuffer:
    """Episode-grouped ring buffer; evicts oldest episodes first."""

    def __init__(self, capacity: int = 100_000, seed=None):
        if capacity <= 0:
            raise ValueError("capacity must be positive")
        self.capacity = int(capacity)
        self.episodes: deque[list[Transition]] = deque()
        self.size = 0
        self.rng = np.random.default_rng(seed)

    def store_episode(self, episode):
        episode = list(episode)
        if not episode:
            raise ValueError("cannot store an empty episode")
        for a, b in zip(episode, episode[1:]):
            if not np.array_equal(a.next_observation, b.observation):
                raise ValueError("episode transitions do not chain")
        self.episodes.append(episode)
        self.size += len(episode)
        while self.size > self.capacity and len(self.episodes) > 1:
            self.size -= len(self.episodes.popleft())

    def sample_batch(self, batch_size: int, relabel_probability: float = 0.0,
                     strategy: str = "final",
                     reward_cfg: RewardConfig | None = None) -> list[Transition]:
        """Uniform sample over stored transitions, each independently
        relabeled with the given probability."""
        if self.size == 0:
            raise ValueError("cannot sample from an empty buffer")
        if relabel_probability > 0 and reward_cfg is None:
            raise ValueError("relabeling requires a reward config")
        episodes = list(self.episodes)
        cum = np.cumsum([len(e) for e in episodes])
        flat = self.rng.integers(0, self.size, size=int(batch_size))
        out = []
        for idx in flat:
            e = int(np.searchsorted(cum, idx, side="right"))
            t = int(idx - (cum[e - 1] if e else 0))
            if relabel_probability > 0 and self.rng.random() < relabel_probability:
                out.append(her_relabel(episodes[e], t, strategy, self.rng, reward_cfg))
            else:
                out.append(episodes[e][t])
        return out


def batch_to_arrays(batch) -> dict:
    """Stack a list of transitions into float64 arrays for the learner."""
    return {
        "observation": np.stack([tr.observation for tr in batch]),
        "next_observation": np.stack([tr.next_observation for tr in batch]),
        "action": np.stack([tr.action for tr in batch]),
        "goal": np.stack([tr.goal for tr in batch]),
        "reward": np.array([tr.reward for tr in batch], dtype=float),
        "terminal": np.array([tr.terminal for tr in batch], dtype=float),
    }
