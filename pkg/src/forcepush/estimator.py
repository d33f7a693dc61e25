"""Scikit-learn style front end for the pushing-task learner.

``ForceSensingDDPG`` exposes the usual estimator surface (``get_params`` /
``set_params`` / ``fit`` / ``predict`` / ``score``) so the trainer composes
with sklearn tooling (cloning, grid search over reward variants, pipelines
that consume the learned controller).
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError
from sklearn.utils import check_array

from .agent import AgentHyper
from .trainer import TrainConfig, _evaluate_stats, run_training


class ForceSensingDDPG(BaseEstimator):
    """Goal-conditioned DDPG+HER pushing controller with force-based safety.

    ``fit`` trains against the built-in simulator; afterwards ``predict``
    maps stacked (observation, goal) rows of width 18 to actions in
    [-1, 1]^3 and ``score`` reports the noise-free success rate.
    """

    def __init__(self, reward_variant="r1", episodes=300, seed=0, gamma=0.98,
                 actor_lr=1e-3, critic_lr=1e-3, batch_size=128, noise_std=0.1,
                 polyak=0.995, updates_per_episode=40, her_k=0.8,
                 her_strategy="final", safety=True, pose_noise_std=0.0,
                 eval_every=10, eval_episodes=20, use_target_networks=True,
                 buffer_capacity=100_000):
        self.reward_variant = reward_variant
        self.episodes = episodes
        self.seed = seed
        self.gamma = gamma
        self.actor_lr = actor_lr
        self.critic_lr = critic_lr
        self.batch_size = batch_size
        self.noise_std = noise_std
        self.polyak = polyak
        self.updates_per_episode = updates_per_episode
        self.her_k = her_k
        self.her_strategy = her_strategy
        self.safety = safety
        self.pose_noise_std = pose_noise_std
        self.eval_every = eval_every
        self.eval_episodes = eval_episodes
        self.use_target_networks = use_target_networks
        self.buffer_capacity = buffer_capacity

    def _make_config(self) -> TrainConfig:
        hyper = AgentHyper(
            gamma=self.gamma, actor_lr=self.actor_lr, critic_lr=self.critic_lr,
            batch_size=self.batch_size, noise_std=self.noise_std,
            polyak=self.polyak, updates_per_episode=self.updates_per_episode,
            use_target_networks=self.use_target_networks)
        return TrainConfig(
            reward_variant=self.reward_variant, episodes=self.episodes,
            seed=self.seed, her_k=self.her_k, her_strategy=self.her_strategy,
            safety=self.safety, pose_noise_std=self.pose_noise_std,
            eval_every=self.eval_every, eval_episodes=self.eval_episodes,
            buffer_capacity=self.buffer_capacity, agent=hyper)

    def fit(self, X=None, y=None):
        """Train the controller; X and y are ignored (the simulator is the
        data source) and accepted only for API compatibility."""
        config = self._make_config()
        self.agent_, self.run_log_ = run_training(config)
        self.config_ = config
        return self

    def _check_fitted(self):
        if not hasattr(self, "agent_"):
            raise NotFittedError(
                "this ForceSensingDDPG instance is not fitted yet; call fit first")

    def predict(self, X):
        """Greedy actions for stacked (observation, goal) rows."""
        self._check_fitted()
        X = check_array(X, dtype=np.float64)
        width = self.agent_.obs_dim + self.agent_.goal_dim
        if X.shape[1] != width:
            raise ValueError(f"expected {width} columns (observation + goal), "
                             f"got {X.shape[1]}")
        return self.agent_.actor.forward(X)

    def score(self, X=None, y=None):
        """Noise-free success rate over a fresh evaluation set."""
        self._check_fitted()
        stats = _evaluate_stats(
            lambda obs, goal: self.agent_.act(obs, goal),
            self.config_, self.config_.seed + 2_000_000)
        return stats.success_rate
