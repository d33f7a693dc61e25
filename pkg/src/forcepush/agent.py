"""Actor-critic learning rules for the goal-conditioned pushing task.

The critic regresses one-step TD targets; the actor follows the sampled
deterministic policy gradient, obtained by chaining the critic's gradient
with respect to its action slice through the actor network. Target networks
use Polyak averaging and can be disabled to bootstrap from the online nets.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .nets import AdamState, Mlp, adam_step, polyak_update


@dataclass
class AgentHyper:
    gamma: float = 0.98
    actor_lr: float = 1e-3
    critic_lr: float = 1e-3
    batch_size: int = 128
    noise_std: float = 0.1           # exploration noise, action units
    polyak: float = 0.995
    updates_per_episode: int = 40
    hidden_dims: tuple = (64, 64)
    use_target_networks: bool = True

    def __post_init__(self):
        if not 0.0 <= self.gamma < 1.0:
            raise ValueError("gamma must lie in [0, 1)")
        if self.actor_lr <= 0 or self.critic_lr <= 0:
            raise ValueError("learning rates must be positive")
        if self.batch_size <= 0 or self.updates_per_episode < 0:
            raise ValueError("batch size must be positive")
        if self.noise_std < 0:
            raise ValueError("noise_std must be non-negative")
        if not 0.0 <= self.polyak <= 1.0:
            raise ValueError("polyak must lie in [0, 1]")


def select_action(actor: Mlp, observation, goal, noise_std: float, rng=None):
    """Actor output on (observation, goal) plus clipped Gaussian noise."""
    x = np.concatenate([np.asarray(observation, float), np.asarray(goal, float)])
    action = actor.forward(x)
    if noise_std > 0:
        if rng is None:
            raise ValueError("noisy action selection needs an rng")
        action = action + rng.normal(0.0, noise_std, size=action.shape)
    return np.clip(action, -1.0, 1.0)


def td_target(critic: Mlp, actor: Mlp, next_obs, goals, rewards, terminals,
              gamma: float) -> np.ndarray:
    """y_i = r_i + gamma * Q(s', pi(s'), g); emergency stops do not bootstrap."""
    next_obs = np.asarray(next_obs, float)
    goals = np.asarray(goals, float)
    if len(next_obs) == 0:
        raise ValueError("empty batch")
    sg = np.concatenate([next_obs, goals], axis=1)
    next_actions = actor.forward(sg)
    q_next = critic.forward(np.concatenate([next_obs, next_actions, goals], axis=1))[:, 0]
    return np.asarray(rewards, float) + gamma * q_next * (1.0 - np.asarray(terminals, float))


def critic_update(critic: Mlp, adam_state: AdamState, obs, actions, goals, y):
    """One Adam step on the mean-squared TD error; returns the pre-update loss."""
    obs = np.asarray(obs, float)
    y = np.asarray(y, float)
    n = len(y)
    if n != len(obs):
        raise ValueError("target/batch length mismatch")
    x = np.concatenate([obs, np.asarray(actions, float), np.asarray(goals, float)], axis=1)
    q = critic.forward(x)[:, 0]
    diff = q - y
    loss = float(np.mean(diff ** 2))
    grads, _ = critic.backward(x, (2.0 / n) * diff[:, None])
    adam_step(critic.params, grads, adam_state)
    return loss


def actor_update(actor: Mlp, critic: Mlp, adam_state: AdamState, obs, goals):
    """One Adam ascent step on mean Q(s, pi(s), g); returns the pre-update mean Q."""
    obs = np.asarray(obs, float)
    goals = np.asarray(goals, float)
    n = obs.shape[0]
    if n == 0:
        raise ValueError("empty batch")
    sg = np.concatenate([obs, goals], axis=1)
    actions = actor.forward(sg)
    x = np.concatenate([obs, actions, goals], axis=1)
    q = critic.forward(x)[:, 0]
    _, x_grad = critic.backward(x, np.full((n, 1), 1.0 / n))
    action_grad = x_grad[:, obs.shape[1]:obs.shape[1] + actions.shape[1]]
    grads, _ = actor.backward(sg, action_grad)
    adam_step(actor.params, [-g for g in grads], adam_state)
    return float(np.mean(q))


class DdpgAgent:
    """Actor, critic, their targets, and the optimizer states."""

    def __init__(self, hyper: AgentHyper | None = None, obs_dim: int = 16,
                 goal_dim: int = 2, action_dim: int = 3, seed=None):
        self.hyper = hyper if hyper is not None else AgentHyper()
        self.obs_dim = obs_dim
        self.goal_dim = goal_dim
        self.action_dim = action_dim
        rng = np.random.default_rng(seed)
        h = self.hyper
        self.actor = Mlp([obs_dim + goal_dim, *h.hidden_dims, action_dim],
                         output_activation="tanh", rng=rng)
        self.critic = Mlp([obs_dim + action_dim + goal_dim, *h.hidden_dims, 1],
                          output_activation="identity", rng=rng)
        self.target_actor = self.actor.copy()
        self.target_critic = self.critic.copy()
        self.actor_adam = AdamState.for_params(self.actor.params, h.actor_lr)
        self.critic_adam = AdamState.for_params(self.critic.params, h.critic_lr)

    def act(self, observation, goal, noise_std: float = 0.0, rng=None):
        return select_action(self.actor, observation, goal, noise_std, rng)

    def train_on_batch(self, arrays: dict):
        """One optimization step on a sampled batch; returns (critic loss, mean Q)."""
        h = self.hyper
        if h.use_target_networks:
            critic_t, actor_t = self.target_critic, self.target_actor
        else:
            critic_t, actor_t = self.critic, self.actor
        y = td_target(critic_t, actor_t, arrays["next_observation"], arrays["goal"],
                      arrays["reward"], arrays["terminal"], h.gamma)
        loss = critic_update(self.critic, self.critic_adam, arrays["observation"],
                             arrays["action"], arrays["goal"], y)
        mean_q = actor_update(self.actor, self.critic, self.actor_adam,
                              arrays["observation"], arrays["goal"])
        if h.use_target_networks:
            polyak_update(self.target_actor, self.actor, h.polyak)
            polyak_update(self.target_critic, self.critic, h.polyak)
        return loss, mean_q
