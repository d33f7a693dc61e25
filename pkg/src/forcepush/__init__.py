"""Force-sensing safe reinforcement learning for planar pushing."""

from .agent import AgentHyper, DdpgAgent, select_action
from .estimator import ForceSensingDDPG
from .nets import AdamState, Mlp, adam_step, polyak_update
from .replay import ReplayBuffer, Transition, her_relabel
from .rewards import RewardConfig, indicator_ft, indicator_touch, r_d, shaped_reward
from .safety import SafetyConfig, clamp_displacement, corrective_action, estop_check
from .sim import PushEnv, SimConfig, SimState, filtered_block_pose, is_success
from .trainer import (TrainConfig, emit_csv, evaluate, load_checkpoint,
                      make_scripted_policy, run_training, save_checkpoint)

__version__ = "0.1.0"

__all__ = [
    "AdamState", "AgentHyper", "DdpgAgent", "ForceSensingDDPG", "Mlp",
    "PushEnv", "ReplayBuffer", "RewardConfig", "SafetyConfig", "SimConfig",
    "SimState", "TrainConfig", "Transition", "adam_step", "clamp_displacement",
    "corrective_action", "emit_csv", "estop_check", "evaluate",
    "filtered_block_pose", "her_relabel", "indicator_ft", "indicator_touch",
    "is_success", "load_checkpoint", "make_scripted_policy", "polyak_update",
    "r_d", "run_training", "save_checkpoint", "select_action", "shaped_reward",
]
