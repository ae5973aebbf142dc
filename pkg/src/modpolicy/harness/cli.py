"""Command-line entry points.

    modpolicy demo-gen --task reach --n 200 --seed 0 --out data/reach.jsonl
    modpolicy train    --config cfg.toml --out runs/reach
    modpolicy eval     --checkpoint runs/reach/model.ckpt --task reach \
                       --episodes 50 --seeds 0,1,2
    modpolicy ablate   --tasks reach,avoid --out ablation.csv
    modpolicy sweep    --checkpoint runs/reach/model.ckpt \
                       --steps 20,40,60,80,100 --out sweep.csv

Exit code 0 on success; nonzero with a one-line diagnostic on stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .ablate import run_ablation
from .config import RunConfig
from .evaluate import evaluate_policy, policy_from_checkpoint
from .records import RunRecord
from .sweep import DEFAULT_SWEEP_STEPS, run_sweep
from .train import train


def _int_list(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x.strip()]


def _cmd_demo_gen(args) -> int:
    from ..envs import generate_demos
    demos = generate_demos(args.task, args.n, args.seed, args.out)
    print(f"wrote {len(demos)} episodes to {args.out}")
    return 0


def _cmd_train(args) -> int:
    cfg = RunConfig.from_toml(args.config)
    result = train(cfg, args.out, progress=not args.quiet)
    print(f"checkpoint: {result.checkpoint_path}")
    print(f"run record: {result.record_path}")
    return 0


def _cmd_eval(args) -> int:
    policy, cfg = policy_from_checkpoint(args.checkpoint)
    task = args.task or cfg.task
    summary, plan_seconds = evaluate_policy(policy, task, args.episodes,
                                            _int_list(args.seeds))
    record = RunRecord(config_hash=cfg.config_hash(), task=task, seed=cfg.seed,
                       evaluation=summary,
                       timing={"mean_plan_seconds": plan_seconds})
    payload = record.to_dict()
    if args.out:
        record.save(args.out)
    print(json.dumps(payload, indent=2, sort_keys=True))
    return 0


def _cmd_ablate(args) -> int:
    rows = run_ablation(
        tasks=[t.strip() for t in args.tasks.split(",") if t.strip()],
        out_csv=args.out, data_dir=args.data_dir, n_episodes=args.episodes,
        seeds=_int_list(args.seeds), epochs=args.epochs, train_seed=args.train_seed,
        progress=not args.quiet)
    print(f"wrote {len(rows)} rows to {args.out}")
    return 0


def _cmd_sweep(args) -> int:
    rows = run_sweep(args.checkpoint, args.out, steps=_int_list(args.steps),
                     task=args.task, n_episodes=args.episodes,
                     seeds=_int_list(args.seeds), progress=not args.quiet)
    print(f"wrote {len(rows)} rows to {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="modpolicy",
                                     description="diffusion-policy training and evaluation")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("demo-gen", help="generate scripted-expert demonstrations")
    p.add_argument("--task", required=True, choices=["reach", "avoid"])
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_demo_gen)

    p = sub.add_parser("train", help="train a policy from a TOML config")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--quiet", action="store_true")
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("eval", help="evaluate a checkpoint with rollouts")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--task", default=None)
    p.add_argument("--episodes", type=int, default=50)
    p.add_argument("--seeds", default="0,1,2")
    p.add_argument("--out", default=None, help="optional RunRecord JSON path")
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("ablate", help="train+evaluate all four decoder variants")
    p.add_argument("--tasks", default="reach,avoid")
    p.add_argument("--out", required=True)
    p.add_argument("--data-dir", default="data")
    p.add_argument("--episodes", type=int, default=50)
    p.add_argument("--seeds", default="0,1,2")
    p.add_argument("--epochs", type=int, default=None)
    p.add_argument("--train-seed", type=int, default=0)
    p.add_argument("--quiet", action="store_true")
    p.set_defaults(func=_cmd_ablate)

    p = sub.add_parser("sweep", help="DDIM sampling-step sweep on a checkpoint")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--steps", default=",".join(str(s) for s in DEFAULT_SWEEP_STEPS))
    p.add_argument("--out", required=True)
    p.add_argument("--task", default=None)
    p.add_argument("--episodes", type=int, default=50)
    p.add_argument("--seeds", default="0,1,2")
    p.add_argument("--quiet", action="store_true")
    p.set_defaults(func=_cmd_sweep)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:  # one-line diagnostic, nonzero exit
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
