"""DDIM sampling-step sweep over one trained checkpoint."""

from __future__ import annotations

import csv
from pathlib import Path

from .evaluate import evaluate_policy, policy_from_checkpoint

SWEEP_CSV_HEADER = ["sample_steps", "success_mean", "success_std",
                    "network_evals", "mean_plan_seconds"]
DEFAULT_SWEEP_STEPS = (20, 40, 60, 80, 100)


def run_sweep(checkpoint_path, out_csv, steps=DEFAULT_SWEEP_STEPS, task: str | None = None,
              n_episodes: int = 50, seeds: list[int] = (0, 1, 2),
              progress: bool = False) -> list[dict]:
    rows = []
    for n_steps in steps:
        policy, cfg = policy_from_checkpoint(
            checkpoint_path, sampler="ddim", sample_timesteps=int(n_steps))
        task_name = task or cfg.task
        summary, plan_seconds = evaluate_policy(policy, task_name, n_episodes, list(seeds))
        rows.append({
            "sample_steps": int(n_steps),
            "success_mean": f"{summary.mean:.6f}",
            "success_std": f"{summary.std:.6f}",
            "network_evals": summary.network_evals_per_trajectory,
            "mean_plan_seconds": f"{plan_seconds:.6f}",
        })
        if progress:
            print(f"T_sample={n_steps}: success {summary.mean:.3f}, "
                  f"{plan_seconds * 1e3:.1f} ms/plan")
    out_csv = Path(out_csv)
    out_csv.parent.mkdir(parents=True, exist_ok=True)
    with out_csv.open("w", encoding="utf-8", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=SWEEP_CSV_HEADER, lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
    return rows
