"""Run configuration: everything a training/evaluation run depends on.

A run is reproducible from (RunConfig, seed) alone; the config hash covers
every semantically relevant field (output locations excluded).
"""

from __future__ import annotations

import hashlib
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

from ..diffusion import DiffusionConfig
from ..envs import TASKS, get_task
from ..nets import ConfigError, PolicyConfig

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

DEFAULT_EPOCHS = 30


@dataclass
class OptimConfig:
    lr: float = 1e-4
    weight_decay: float = 1e-3
    batch_size: int = 64
    epochs: int = DEFAULT_EPOCHS

    def to_dict(self) -> dict:
        return {"lr": self.lr, "weight_decay": self.weight_decay,
                "batch_size": self.batch_size, "epochs": self.epochs}

    @classmethod
    def from_dict(cls, d: dict) -> "OptimConfig":
        return cls(**d)


@dataclass
class RunConfig:
    task: str = "reach"
    dataset: str = "data/reach.jsonl"
    seed: int = 0
    policy: PolicyConfig = field(default_factory=PolicyConfig)
    diffusion: DiffusionConfig = field(default_factory=DiffusionConfig)
    optim: OptimConfig = field(default_factory=OptimConfig)

    def __post_init__(self):
        if self.task not in TASKS:
            raise ConfigError(f"task must be one of {TASKS}, got {self.task!r}")
        expected = get_task(self.task).obs_dim
        if self.policy.obs_dim != expected:
            raise ConfigError(
                f"task {self.task!r} produces obs_dim={expected}, "
                f"policy configured for {self.policy.obs_dim}")

    def to_dict(self) -> dict:
        return {"task": self.task, "dataset": self.dataset, "seed": self.seed,
                "policy": self.policy.to_dict(), "diffusion": self.diffusion.to_dict(),
                "optim": self.optim.to_dict()}

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        return cls(task=d.get("task", "reach"),
                   dataset=d.get("dataset", "data/reach.jsonl"),
                   seed=int(d.get("seed", 0)),
                   policy=PolicyConfig.from_dict(d.get("policy", {})),
                   diffusion=DiffusionConfig.from_dict(d.get("diffusion", {})),
                   optim=OptimConfig.from_dict(d.get("optim", {})))

    @classmethod
    def from_toml(cls, path) -> "RunConfig":
        with open(path, "rb") as f:
            return cls.from_dict(tomllib.load(f))

    def config_hash(self) -> str:
        body = {k: v for k, v in self.to_dict().items() if k != "dataset"}
        body["dataset_name"] = Path(self.dataset).name
        blob = json.dumps(body, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def default_config_for_task(task: str, arch: str = "mtdp", dataset: str | None = None,
                            **overrides) -> RunConfig:
    """Desk defaults wired up for a task's observation dimensionality."""
    policy_kw = {"arch": arch, "obs_dim": get_task(task).obs_dim}
    policy_kw.update(overrides.pop("policy", {}))
    return RunConfig(task=task,
                     dataset=dataset or f"data/{task}.jsonl",
                     policy=PolicyConfig(**policy_kw),
                     **overrides)
