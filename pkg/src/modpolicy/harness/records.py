"""Persisted run outcomes.

The JSON record has a fully deterministic body; wall-clock measurements
live under the single "timing" key so reproducibility checks can compare
records with timing stripped (identical seeds cannot reproduce wall time).
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path


@dataclass
class EvalSummary:
    seeds: list[int]
    n_episodes: int
    success_rates: list[float]          # one per seed, episode-mean
    mean: float
    std: float
    mode_counts: dict[str, int]
    network_evals_per_trajectory: int | None


@dataclass
class RunRecord:
    config_hash: str
    task: str
    seed: int
    epoch_losses: list[float] = field(default_factory=list)
    evaluation: EvalSummary | None = None
    timing: dict[str, float] = field(default_factory=dict)

    def to_dict(self, include_timing: bool = True) -> dict:
        d = {
            "config_hash": self.config_hash,
            "task": self.task,
            "seed": self.seed,
            "epoch_losses": list(self.epoch_losses),
            "evaluation": asdict(self.evaluation) if self.evaluation else None,
        }
        if include_timing:
            d["timing"] = dict(self.timing)
        return d

    def save(self, path):
        Path(path).write_text(
            json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8")

    @staticmethod
    def load_dict(path) -> dict:
        return json.loads(Path(path).read_text(encoding="utf-8"))

    @staticmethod
    def deterministic_view(record_dict: dict) -> dict:
        """The record without its timing block, for byte-level comparisons."""
        return {k: v for k, v in record_dict.items() if k != "timing"}
