"""Command-line interface: train / eval / compare.

Configuration files are flat ``key = value`` text with keys identical to the
CLI flag names; command-line flags override file values.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .agent import AgentHyper
from .rewards import REWARD_VARIANTS
from .trainer import (CSV_HEADER, RunRow, TrainConfig, _evaluate_stats, emit_csv,
                      load_checkpoint, run_training, save_checkpoint)

# flag name -> (TrainConfig attribute path, parser)
_ONOFF = {"on": True, "off": False}


def _onoff(value: str) -> bool:
    if value not in _ONOFF:
        raise argparse.ArgumentTypeError(f"expected 'on' or 'off', got {value!r}")
    return _ONOFF[value]


FLAG_SPEC = {
    "reward-config": ("reward_variant", str),
    "episodes": ("episodes", int),
    "seed": ("seed", int),
    "safety": ("safety", _onoff),
    "her-k": ("her_k", float),
    "her-strategy": ("her_strategy", str),
    "pose-noise": ("pose_noise_std", float),
    "out": ("output_dir", str),
    "eval-every": ("eval_every", int),
    "eval-episodes": ("eval_episodes", int),
    "buffer-capacity": ("buffer_capacity", int),
    "gamma": ("agent.gamma", float),
    "actor-lr": ("agent.actor_lr", float),
    "critic-lr": ("agent.critic_lr", float),
    "batch-size": ("agent.batch_size", int),
    "noise-std": ("agent.noise_std", float),
    "polyak": ("agent.polyak", float),
    "updates-per-episode": ("agent.updates_per_episode", int),
    "target-networks": ("agent.use_target_networks", _onoff),
    "k-ft": ("safety_cfg.k_ft", float),
    "v-max": ("safety_cfg.v_max", float),
    "estop-threshold": ("safety_cfg.estop_force_threshold", float),
}


def parse_config_file(path) -> dict:
    """Flat ``key = value`` lines; blank lines and ``#`` comments ignored."""
    values = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        if key not in FLAG_SPEC:
            raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
        values[key] = value.strip()
    return values


def build_train_config(file_values: dict, cli_values: dict) -> TrainConfig:
    merged = {}
    for key, raw in file_values.items():
        _, parse = FLAG_SPEC[key]
        merged[key] = parse(raw)
    for key, value in cli_values.items():
        if value is not None:
            merged[key] = value
    config = TrainConfig()
    agent_kwargs = {}
    safety_kwargs = {}
    top_kwargs = {}
    for key, value in merged.items():
        attr, _ = FLAG_SPEC[key]
        if attr.startswith("agent."):
            agent_kwargs[attr.split(".", 1)[1]] = value
        elif attr.startswith("safety_cfg."):
            safety_kwargs[attr.split(".", 1)[1]] = value
        else:
            top_kwargs[attr] = value
    if agent_kwargs:
        top_kwargs["agent"] = replace(config.agent, **agent_kwargs)
    if safety_kwargs:
        top_kwargs["safety_cfg"] = replace(config.safety_cfg, **safety_kwargs)
    return replace(config, **top_kwargs)


def _add_train_flags(parser):
    parser.add_argument("--reward-config", choices=REWARD_VARIANTS, dest="reward-config")
    parser.add_argument("--episodes", type=int, dest="episodes")
    parser.add_argument("--seed", type=int, dest="seed")
    parser.add_argument("--safety", type=_onoff, dest="safety")
    parser.add_argument("--her-k", type=float, dest="her-k")
    parser.add_argument("--her-strategy", choices=("final", "future"), dest="her-strategy")
    parser.add_argument("--pose-noise", type=float, dest="pose-noise")
    parser.add_argument("--out", dest="out")
    parser.add_argument("--eval-every", type=int, dest="eval-every")
    parser.add_argument("--eval-episodes", type=int, dest="eval-episodes")
    parser.add_argument("--buffer-capacity", type=int, dest="buffer-capacity")
    parser.add_argument("--gamma", type=float, dest="gamma")
    parser.add_argument("--actor-lr", type=float, dest="actor-lr")
    parser.add_argument("--critic-lr", type=float, dest="critic-lr")
    parser.add_argument("--batch-size", type=int, dest="batch-size")
    parser.add_argument("--noise-std", type=float, dest="noise-std")
    parser.add_argument("--polyak", type=float, dest="polyak")
    parser.add_argument("--updates-per-episode", type=int, dest="updates-per-episode")
    parser.add_argument("--target-networks", type=_onoff, dest="target-networks")
    parser.add_argument("--k-ft", type=float, dest="k-ft")
    parser.add_argument("--v-max", type=float, dest="v-max")
    parser.add_argument("--estop-threshold", type=float, dest="estop-threshold")


def _cmd_train(args) -> int:
    file_values = parse_config_file(args.config) if args.config else {}
    cli_values = {key: vars(args).get(key) for key in FLAG_SPEC}
    config = build_train_config(file_values, cli_values)
    out = Path(config.output_dir) if config.output_dir else Path(".")
    out.mkdir(parents=True, exist_ok=True)

    print(CSV_HEADER)

    def progress(row: RunRow):
        print(f"{row.episode},{row.success_rate!r},{row.mean_reward!r},"
              f"{row.collisions},{row.mean_max_force!r},{row.wall_time!r}")

    agent, rows = run_training(config, progress=progress)
    emit_csv(rows, out / "log.csv")
    save_checkpoint(out / "checkpoint.fsrl", agent, config)
    print(f"wrote {out / 'log.csv'} and {out / 'checkpoint.fsrl'}")
    return 0


def _cmd_eval(args) -> int:
    agent, _ = load_checkpoint(args.checkpoint)
    config = TrainConfig(eval_episodes=args.episodes,
                         safety=args.safety if args.safety is not None else True,
                         pose_noise_std=args.pose_noise or 0.0)
    stats = _evaluate_stats(lambda obs, goal: agent.act(obs, goal), config, args.seed)
    print(f"success_rate={stats.success_rate} collisions={stats.collisions} "
          f"mean_reward={stats.mean_reward} mean_max_force={stats.mean_max_force}")
    return 0


# Paired safety setting for the comparison runs: the force-sensing variants
# run with the safe-control layer, the touch-only/plain variants without.
COMPARE_SAFETY = {"r1": True, "r2": True, "r3": False, "r4": False}


def _cmd_compare(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    seeds = [int(s) for s in args.seeds.split(",")]
    summary = ["variant,safety,mean_final_success_rate,mean_final_collisions"]
    for variant in REWARD_VARIANTS:
        safety = COMPARE_SAFETY[variant]
        per_seed_rows = []
        for seed in seeds:
            config = TrainConfig(reward_variant=variant, episodes=args.episodes,
                                 seed=seed, safety=safety,
                                 eval_every=args.eval_every)
            _, rows = run_training(config)
            per_seed_rows.append(rows)
            print(f"{variant} seed {seed}: final success "
                  f"{rows[-1].success_rate}, collisions {rows[-1].collisions}")
        # average across seeds at each evaluation point
        merged = []
        for point in zip(*per_seed_rows):
            merged.append(RunRow(
                episode=point[0].episode,
                success_rate=float(np.mean([r.success_rate for r in point])),
                mean_reward=float(np.mean([r.mean_reward for r in point])),
                collisions=int(round(np.mean([r.collisions for r in point]))),
                mean_max_force=float(np.mean([r.mean_max_force for r in point])),
                wall_time=float(np.mean([r.wall_time for r in point])),
            ))
        emit_csv(merged, out / f"{variant}.csv")
        summary.append(
            f"{variant},{'on' if safety else 'off'},"
            f"{np.mean([rows[-1].success_rate for rows in per_seed_rows])},"
            f"{np.mean([rows[-1].collisions for rows in per_seed_rows])}")
    (out / "summary.csv").write_text("\n".join(summary) + "\n")
    print("\n".join(summary))
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="forcepush",
        description="Force-sensing safe RL for planar pushing")
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="train one configuration")
    _add_train_flags(p_train)
    p_train.add_argument("--config", help="flat key = value config file")
    p_train.set_defaults(func=_cmd_train)

    p_eval = sub.add_parser("eval", help="evaluate a checkpoint")
    p_eval.add_argument("--checkpoint", required=True)
    p_eval.add_argument("--episodes", type=int, default=20)
    p_eval.add_argument("--seed", type=int, default=0)
    p_eval.add_argument("--safety", type=_onoff, default=None)
    p_eval.add_argument("--pose-noise", type=float, default=None, dest="pose_noise")
    p_eval.set_defaults(func=_cmd_eval)

    p_cmp = sub.add_parser("compare", help="run all four reward variants")
    p_cmp.add_argument("--out", required=True)
    p_cmp.add_argument("--seeds", default="0,1,2")
    p_cmp.add_argument("--episodes", type=int, default=300)
    p_cmp.add_argument("--eval-every", type=int, default=50, dest="eval_every")
    p_cmp.set_defaults(func=_cmd_compare)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
