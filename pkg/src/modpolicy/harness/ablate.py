"""Four-variant ablation: train and evaluate every decoder variant per task.

All runs share one budget and one set of evaluation seeds; the CSV is
byte-stable for a fixed configuration.
"""

from __future__ import annotations

import csv
from pathlib import Path

from ..nets import BlockVariant
from .config import default_config_for_task
from .evaluate import evaluate_policy
from .train import train

ABLATION_CSV_HEADER = ["variant", "task", "success_mean", "success_std",
                       "n_episodes", "n_seeds"]


def run_ablation(tasks: list[str], out_csv, data_dir="data", work_dir=None,
                 n_episodes: int = 50, seeds: list[int] = (0, 1, 2),
                 epochs: int | None = None, train_seed: int = 0,
                 progress: bool = False) -> list[dict]:
    out_csv = Path(out_csv)
    work_dir = Path(work_dir) if work_dir else out_csv.parent / "ablation_runs"
    rows = []
    for variant in BlockVariant:
        for task in tasks:
            overrides = {"policy": {"variant": variant}, "seed": train_seed}
            cfg = default_config_for_task(
                task, dataset=str(Path(data_dir) / f"{task}.jsonl"), **overrides)
            if epochs is not None:
                cfg.optim.epochs = epochs
            run_dir = work_dir / f"{variant.value}_{task}"
            result = train(cfg, run_dir, progress=progress)
            summary, _ = evaluate_policy(result.policy, task, n_episodes, list(seeds))
            rows.append({
                "variant": variant.value, "task": task,
                "success_mean": f"{summary.mean:.6f}",
                "success_std": f"{summary.std:.6f}",
                "n_episodes": n_episodes, "n_seeds": len(seeds),
            })
            if progress:
                print(f"{variant.value} / {task}: {summary.mean:.3f}")
    out_csv.parent.mkdir(parents=True, exist_ok=True)
    with out_csv.open("w", encoding="utf-8", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=ABLATION_CSV_HEADER, lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
    return rows
