"""End-to-end training and evaluation harness.

Implements the full loop: rollouts through the safety pipeline, hindsight
replay, actor/critic optimization, periodic noise-free evaluation, CSV
logging and binary checkpoints. Everything downstream of the seed is
deterministic (wall time excepted; a timer can be injected for tests).
"""

from __future__ import annotations

import hashlib
import json
import struct
import time
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .agent import AgentHyper, DdpgAgent, select_action
from .nets import AdamState, Mlp
from .replay import ReplayBuffer, Transition, batch_to_arrays
from .rewards import RewardConfig, shaped_reward
from .safety import SafetyConfig, clamp_displacement, corrective_action, estop_check
from .sim import PushEnv, SimConfig, is_success


@dataclass
class TrainConfig:
    reward_variant: str = "r1"
    episodes: int = 300
    seed: int = 0
    her_k: float = 0.8
    her_strategy: str = "final"
    safety: bool = True
    pose_noise_std: float = 0.0
    eval_every: int = 10
    eval_episodes: int = 20
    buffer_capacity: int = 100_000
    output_dir: str | None = None
    sim: SimConfig = field(default_factory=SimConfig)
    agent: AgentHyper = field(default_factory=AgentHyper)
    safety_cfg: SafetyConfig = field(default_factory=SafetyConfig)

    def __post_init__(self):
        if self.episodes <= 0 or self.eval_episodes <= 0 or self.eval_every <= 0:
            raise ValueError("episode counts must be positive")
        if not 0.0 <= self.her_k <= 1.0:
            raise ValueError("her_k must lie in [0, 1]")
        if self.safety_cfg.estop_force_threshold <= self.sim.sigma_ft:
            raise ValueError("estop threshold must exceed the reward trigger threshold")

    def effective_sim(self) -> SimConfig:
        return replace(self.sim, pose_noise_std=self.pose_noise_std)

    def effective_safety(self) -> SafetyConfig:
        if self.safety:
            return self.safety_cfg
        return replace(self.safety_cfg, corrective_enabled=False,
                       speed_cap_enabled=False, estop_enabled=False)

    def reward_config(self) -> RewardConfig:
        return RewardConfig(variant=self.reward_variant,
                            sigma_ft=self.sim.sigma_ft,
                            sigma_touch=self.sim.sigma_touch,
                            success_radius=self.sim.success_radius)


@dataclass
class RunRow:
    episode: int
    success_rate: float
    mean_reward: float
    collisions: int
    mean_max_force: float
    wall_time: float


CSV_HEADER = "episode,success_rate,mean_reward,collisions,mean_max_force,wall_time"


@dataclass
class EpisodeResult:
    transitions: list
    success: bool
    collided: bool       # estop threshold crossed at any step
    estopped: bool       # episode actually halted
    max_force: float
    total_reward: float


def run_episode(env: PushEnv, policy, safety: SafetyConfig,
                reward_cfg: RewardConfig, variant: str) -> EpisodeResult:
    """One episode through the safety pipeline.

    ``policy`` maps (observation, goal) to an action in [-1, 1]^3. The stored
    action is the executed displacement expressed in action units, i.e. after
    the corrective term and the speed cap.
    """
    c = env.config
    state = env.reset()
    obs, achieved, goal = env.observe()
    transitions = []
    max_force = 0.0
    total_reward = 0.0
    collided = False
    estopped = False
    v_max = safety.v_max if safety.speed_cap_enabled else float("inf")
    for _ in range(c.max_steps):
        action = policy(obs, goal)
        if safety.corrective_enabled:
            action = corrective_action(action, state.ft_force, safety.k_ft)
        delta = clamp_displacement(action, c.dt, v_max, safety.action_scale)
        state = env.step(delta)
        force_norm = float(np.linalg.norm(state.ft_force))
        max_force = max(max_force, force_norm)
        if estop_check(state.ft_force, safety.estop_force_threshold):
            collided = True
            if safety.estop_enabled:
                env.mark_estopped()
                estopped = True
        next_obs, next_achieved, goal = env.observe()
        reward = shaped_reward(variant, next_achieved, goal,
                               state.ft_force, state.touch, reward_cfg)
        total_reward += reward
        transitions.append(Transition(
            observation=obs, next_observation=next_obs,
            action=delta / safety.action_scale,
            goal=goal, achieved_goal=achieved, next_achieved_goal=next_achieved,
            ft_force=state.ft_force.copy(), touch=state.touch.copy(),
            reward=reward, terminal=estopped))
        obs, achieved = next_obs, next_achieved
        if estopped:
            break
    success = is_success(state.block_pose[:2], state.goal, c)
    return EpisodeResult(transitions, success, collided, estopped,
                         max_force, total_reward)


@dataclass
class EvalStats:
    success_rate: float
    collisions: int
    mean_reward: float
    mean_max_force: float


def _evaluate_stats(policy, config: TrainConfig, seed: int) -> EvalStats:
    sim_cfg = config.effective_sim()
    safety = config.effective_safety()
    reward_cfg = config.reward_config()
    successes = 0
    collisions = 0
    rewards_sum = 0.0
    max_force_sum = 0.0
    n = config.eval_episodes
    for e in range(n):
        env = PushEnv(sim_cfg, seed=np.random.SeedSequence([seed, e]))
        result = run_episode(env, policy, safety, reward_cfg, config.reward_variant)
        if result.collided:
            collisions += 1
        elif result.success:
            successes += 1
        rewards_sum += result.total_reward
        max_force_sum += result.max_force
    return EvalStats(successes / n, collisions, rewards_sum / n, max_force_sum / n)


def evaluate(policy, config: TrainConfig, seed: int):
    """Noise-free evaluation; an episode that collides counts as a failure.

    Returns ``(success_rate, collision_count)``.
    """
    stats = _evaluate_stats(policy, config, seed)
    return stats.success_rate, stats.collisions


def make_scripted_policy(config: SimConfig | None = None):
    """Hand-coded pushing oracle: travel above the block to a point behind it
    on the block-to-goal line, descend, push through, then back off."""
    c = config if config is not None else SimConfig()
    h = c.block_half_extent
    scale = 0.01
    z_push = 0.05
    z_travel = 2.0 * h + 0.02

    def clip_action(step_xy, dz):
        a = np.array([step_xy[0] / scale, step_xy[1] / scale, dz / scale])
        return np.clip(a, -1.0, 1.0)

    def policy(obs, goal):
        gripper = obs[0:3]
        block = obs[6:8]
        to_goal = np.asarray(goal, float) - block
        dist = float(np.linalg.norm(to_goal))
        if dist <= 0.5 * c.success_radius:
            # close enough: climb out of contact and hover
            return clip_action(np.zeros(2), z_travel - gripper[2])
        d = to_goal / dist
        behind = block - d * (h + c.gripper_radius + 0.012)
        to_behind = behind - gripper[:2]
        gap = float(np.linalg.norm(to_behind))
        if gap > 0.012:
            # relocate above the block so transit cannot shove it sideways
            return clip_action(to_behind, z_travel - gripper[2])
        if gripper[2] > z_push + 0.002:
            return clip_action(to_behind, z_push - gripper[2])
        # push toward the centre of the block's near face
        aim = block - d * (h - 0.005)
        to_aim = aim - gripper[:2]
        n = float(np.linalg.norm(to_aim))
        step_xy = to_aim / n * scale if n > 1e-9 else d * scale
        return clip_action(step_xy, z_push - gripper[2])

    return policy


def make_random_policy(rng):
    def policy(obs, goal):
        return rng.uniform(-1.0, 1.0, size=3)
    return policy


def run_training(config: TrainConfig, timer=time.perf_counter, progress=None):
    """Full training loop; returns ``(agent, run_log)``.

    ``progress``, when given, is called with each :class:`RunRow` as it is
    produced (the CLI uses this to stream evaluations to stdout).
    """
    sim_cfg = config.effective_sim()
    safety = config.effective_safety()
    reward_cfg = config.reward_config()
    h = config.agent
    env = PushEnv(sim_cfg, seed=np.random.SeedSequence([config.seed, 0]))
    agent = DdpgAgent(h, seed=np.random.SeedSequence([config.seed, 1]))
    buffer = ReplayBuffer(config.buffer_capacity,
                          seed=np.random.SeedSequence([config.seed, 2]))
    noise_rng = np.random.default_rng(np.random.SeedSequence([config.seed, 3]))
    eval_seed = config.seed + 1_000_000

    def explore(obs, goal):
        return select_action(agent.actor, obs, goal, h.noise_std, noise_rng)

    def greedy(obs, goal):
        return agent.act(obs, goal)

    rows = []
    t0 = timer()
    for episode in range(1, config.episodes + 1):
        result = run_episode(env, explore, safety, reward_cfg, config.reward_variant)
        buffer.store_episode(result.transitions)
        for _ in range(h.updates_per_episode):
            batch = buffer.sample_batch(h.batch_size, config.her_k,
                                        config.her_strategy, reward_cfg)
            agent.train_on_batch(batch_to_arrays(batch))
        if episode % config.eval_every == 0 or episode == config.episodes:
            stats = _evaluate_stats(greedy, config, eval_seed)
            row = RunRow(episode, stats.success_rate, stats.mean_reward,
                         stats.collisions, stats.mean_max_force, timer() - t0)
            rows.append(row)
            if progress is not None:
                progress(row)
    return agent, rows


def emit_csv(rows, path):
    """Write the run log; header is fixed, floats use repr (no locale)."""
    lines = [CSV_HEADER]
    for r in rows:
        lines.append(",".join([
            str(r.episode),
            repr(float(r.success_rate)),
            repr(float(r.mean_reward)),
            str(r.collisions),
            repr(float(r.mean_max_force)),
            repr(float(r.wall_time)),
        ]))
    with open(path, "w", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# checkpoints

CHECKPOINT_MAGIC = b"FSRL"
CHECKPOINT_VERSION = 1


class CheckpointError(Exception):
    pass


class CheckpointMagicError(CheckpointError):
    pass


class CheckpointVersionError(CheckpointError):
    pass


class CheckpointTruncatedError(CheckpointError):
    pass


def config_hash(config: TrainConfig) -> bytes:
    """First 8 bytes of the SHA-256 of the canonical config serialization."""
    canonical = json.dumps(asdict(config), sort_keys=True, default=str)
    return hashlib.sha256(canonical.encode()).digest()[:8]


def _pack_network(net: Mlp) -> bytes:
    parts = [struct.pack("<I", len(net.layer_dims))]
    parts.append(struct.pack(f"<{len(net.layer_dims)}I", *net.layer_dims))
    for p in net.params:
        parts.append(np.ascontiguousarray(p, dtype="<f8").tobytes())
    return b"".join(parts)


def _pack_adam(state: AdamState) -> bytes:
    parts = [struct.pack("<Q", state.step_count)]
    for arrs in (state.first_moment, state.second_moment):
        for a in arrs:
            parts.append(np.ascontiguousarray(a, dtype="<f8").tobytes())
    return b"".join(parts)


class _Cursor:
    def __init__(self, data: bytes):
        self.data = data
        self.offset = 0

    def take(self, n: int) -> bytes:
        if self.offset + n > len(self.data):
            raise CheckpointTruncatedError(
                f"checkpoint truncated at byte {self.offset} (needed {n} more)")
        chunk = self.data[self.offset:self.offset + n]
        self.offset += n
        return chunk


def _unpack_network(cur: _Cursor, output_activation: str) -> Mlp:
    (n_dims,) = struct.unpack("<I", cur.take(4))
    dims = list(struct.unpack(f"<{n_dims}I", cur.take(4 * n_dims)))
    net = Mlp(dims, output_activation=output_activation, rng=0)
    for p in net.params:
        raw = cur.take(8 * p.size)
        p[...] = np.frombuffer(raw, dtype="<f8").reshape(p.shape)
    return net


def _unpack_adam(cur: _Cursor, net: Mlp, learning_rate: float) -> AdamState:
    (step_count,) = struct.unpack("<Q", cur.take(8))
    state = AdamState.for_params(net.params, learning_rate)
    state.step_count = int(step_count)
    for arrs in (state.first_moment, state.second_moment):
        for a in arrs:
            a[...] = np.frombuffer(cur.take(8 * a.size), dtype="<f8").reshape(a.shape)
    return state


def save_checkpoint(path, agent: DdpgAgent, config: TrainConfig):
    blob = bytearray()
    blob += CHECKPOINT_MAGIC
    blob += struct.pack("<B", CHECKPOINT_VERSION)
    for net in (agent.actor, agent.critic, agent.target_actor, agent.target_critic):
        blob += _pack_network(net)
    blob += _pack_adam(agent.actor_adam)
    blob += _pack_adam(agent.critic_adam)
    blob += config_hash(config)
    with open(path, "wb") as fh:
        fh.write(bytes(blob))


def load_checkpoint(path, hyper: AgentHyper | None = None):
    """Reconstruct the agent; returns ``(agent, stored_config_hash)``."""
    with open(path, "rb") as fh:
        cur = _Cursor(fh.read())
    if cur.take(4) != CHECKPOINT_MAGIC:
        raise CheckpointMagicError("not a forcepush checkpoint (bad magic)")
    (version,) = struct.unpack("<B", cur.take(1))
    if version != CHECKPOINT_VERSION:
        raise CheckpointVersionError(f"unsupported checkpoint version {version}")
    h = hyper if hyper is not None else AgentHyper()
    actor = _unpack_network(cur, "tanh")
    critic = _unpack_network(cur, "identity")
    target_actor = _unpack_network(cur, "tanh")
    target_critic = _unpack_network(cur, "identity")
    actor_adam = _unpack_adam(cur, actor, h.actor_lr)
    critic_adam = _unpack_adam(cur, critic, h.critic_lr)
    stored_hash = cur.take(8)
    if cur.offset != len(cur.data):
        raise CheckpointError("trailing bytes after checkpoint payload")

    agent = DdpgAgent.__new__(DdpgAgent)
    agent.hyper = h
    agent.obs_dim = actor.layer_dims[0] - 2
    agent.goal_dim = 2
    agent.action_dim = actor.layer_dims[-1]
    agent.actor = actor
    agent.critic = critic
    agent.target_actor = target_actor
    agent.target_critic = target_critic
    agent.actor_adam = actor_adam
    agent.critic_adam = critic_adam
    return agent, stored_hash
