# This code is part of fqi-air
#
# (C) Copyright fqi-air contributors 2026
#
# This code is licensed under the Apache License, Version 2.0. You may
# obtain a copy of this license in the LICENSE.txt file in the root directory
# of this source tree or at http://www.apache.org/licenses/LICENSE-2.0.
#
# Any modifications or derivative works of this code must retain this
# copyright notice, and modified files need to carry a notice indicating
# that they have been altered from the originals.
"""The fqi-air command line: collect, train, evaluate, sweep and reproduce"""
import argparse
import sys
from pathlib import Path
from typing import List, Optional

from pydantic import ValidationError

import settings
from app.libs.algos import policy_from_text, policy_to_text
from app.libs.collect import collect_dataset
from app.libs.core import RngStream, read_dataset, write_dataset, write_table
from app.libs.envs import SIMULATED_ENV_IDS
from app.libs.eval import j_hat, j_true_mc
from app.libs.models import exact_endo_model
from app.services.experiments import (
    AlgoName,
    FigureId,
    ReproduceConfig,
    SweepConfig,
    TrainConfig,
    build_env,
    env_for_dataset,
    reproduce_figure,
    resolve_behavior,
    run_sweep,
    train_policy,
)
from app.utils.exc import BaseAirException
from app.utils.logging import RunLogger, get_logger

logger = get_logger(__name__)

BEHAVIORS = ("random", "constant", "learned")
ONLINE_COLUMNS = ("policy", "rollouts", "mean", "stderr")
OFFLINE_COLUMNS = ("n", "j_hat", "bound", "zeta", "seed")


def collect(args: argparse.Namespace) -> int:
    env = build_env(args.env, args.eps_air, args.seed, horizon=args.horizon)
    behavior = resolve_behavior(env, args.policy, args.seed, args.collector_episodes)
    d = collect_dataset(
        env,
        behavior,
        args.episodes,
        args.seed,
        args.workers,
        policy_name=args.policy,
        final_state=args.final_state,
    )
    write_dataset(d, args.out)
    logger.info(f"wrote {len(d)} episodes to {args.out}")
    return 0


def train(args: argparse.Namespace) -> int:
    d = read_dataset(args.data)
    cfg = TrainConfig.from_file(args.config) if args.config else TrainConfig()
    env = env_for_dataset(d.meta)
    out = Path(args.out)

    with RunLogger(out.parent, name="train") as run_logger:
        run_logger.info(
            f"algo={args.algo} data={Path(args.data).name} episodes={len(d)}"
        )
        run_logger.info(f"config={cfg.model_dump_json()}")
        policy = train_policy(AlgoName(args.algo), d, env, cfg)
        out.write_text(policy_to_text(policy), encoding="utf-8")
        run_logger.info(f"wrote {policy.kind} policy to {out.name}")
    return 0


def evaluate(args: argparse.Namespace) -> int:
    policy = policy_from_text(Path(args.policy).read_text(encoding="utf-8"))
    rng = RngStream(args.seed, "evaluate")

    if args.data:
        d = read_dataset(args.data)
        env = env_for_dataset(d.meta)
        report = j_hat(
            policy,
            d,
            exact_endo_model(env),
            env.air_spec(),
            rng,
            zeta=args.zeta,
            unbiased=args.unbiased,
        )
        write_table([report.to_row()], OFFLINE_COLUMNS, args.out)
        return 0

    env = build_env(args.env, args.eps_air, args.seed, horizon=args.horizon)
    estimate = j_true_mc(policy, env, args.rollouts, rng)
    row = {
        "policy": Path(args.policy).name,
        "rollouts": args.rollouts,
        "mean": estimate.mean,
        "stderr": estimate.stderr,
    }
    write_table([row], ONLINE_COLUMNS, args.out)
    return 0


def sweep(args: argparse.Namespace) -> int:
    run_sweep(SweepConfig.from_toml(args.config), args.out, args.workers)
    return 0


def reproduce(args: argparse.Namespace) -> int:
    config = ReproduceConfig.from_toml(args.config) if args.config else None
    paths = reproduce_figure(
        args.figure, args.out, args.scale, args.seed, config, args.workers
    )
    for path in paths:
        print(path)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fqi-air", description="Offline RL under action impact regularity."
    )
    commands = parser.add_subparsers(dest="command", required=True)

    p = commands.add_parser("collect", help="Collect a dataset with a behavior policy.")
    p.add_argument("--env", choices=SIMULATED_ENV_IDS, required=True)
    p.add_argument("--policy", choices=BEHAVIORS, required=True)
    p.add_argument("--episodes", type=int, required=True)
    p.add_argument("--eps-air", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=settings.DEFAULT_SEED)
    p.add_argument("--out", required=True)
    p.add_argument("--horizon", type=int, default=None)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument(
        "--collector-episodes",
        type=int,
        default=1000,
        help="Training episodes of the learned behavior policy.",
    )
    p.add_argument(
        "--final-state",
        action="store_true",
        help="Also write the state after the last action as a terminal row.",
    )
    p.set_defaults(handler=collect)

    p = commands.add_parser("train", help="Train a policy on a dataset.")
    p.add_argument("--algo", choices=[a.value for a in AlgoName], required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--config", default=None, help="A file of key=value lines.")
    p.add_argument("--out", required=True)
    p.set_defaults(handler=train)

    p = commands.add_parser("evaluate", help="Score a trained policy.")
    p.add_argument("--policy", required=True)
    source = p.add_mutually_exclusive_group(required=True)
    source.add_argument("--data", help="Replay the policy on this dataset.")
    source.add_argument("--env", choices=SIMULATED_ENV_IDS, help="Roll out online.")
    p.add_argument("--rollouts", type=int, default=100)
    p.add_argument("--eps-air", type=float, default=0.0)
    p.add_argument("--horizon", type=int, default=None)
    p.add_argument("--seed", type=int, default=settings.DEFAULT_SEED)
    p.add_argument("--zeta", type=float, default=settings.DEFAULT_ZETA)
    p.add_argument(
        "--unbiased",
        action="store_true",
        help="Replay only the held-out half of the dataset.",
    )
    p.add_argument("--out", required=True)
    p.set_defaults(handler=evaluate)

    p = commands.add_parser("sweep", help="Run an (algo, N, run) grid from TOML.")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--workers", type=int, default=settings.MAX_WORKERS)
    p.set_defaults(handler=sweep)

    p = commands.add_parser("reproduce", help="Write the CSV files of a figure.")
    p.add_argument("--figure", choices=[f.value for f in FigureId], required=True)
    p.add_argument("--scale", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=settings.DEFAULT_SEED)
    p.add_argument("--out", required=True)
    p.add_argument(
        "--config", default=None, help="A TOML file with a [reproduce] table."
    )
    p.add_argument("--workers", type=int, default=settings.MAX_WORKERS)
    p.set_defaults(handler=reproduce)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Runs one command and returns its exit code

    Library errors and invalid values are printed to stderr with exit code 1.
    """
    args = build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except (BaseAirException, ValidationError, ValueError, OSError) as exp:
        print(f"error: {exp}", file=sys.stderr)
        return 1


def run():
    sys.exit(main())


if __name__ == "__main__":
    run()
