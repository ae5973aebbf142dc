"""The training loop: windows -> AdamW steps on the noise-prediction loss."""

from __future__ import annotations

import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .. import autodiff as ad
from ..autodiff import AdamW, cosine_lr
from ..diffusion import make_schedule, training_loss
from ..envs import load_dataset, make_windows
from ..nets import DiffusionPolicy, build_network, save_checkpoint
from ..rng import substream
from .config import RunConfig
from .records import RunRecord


class TrainingDiverged(RuntimeError):
    pass


@dataclass
class TrainResult:
    checkpoint_path: Path
    record_path: Path
    record: RunRecord
    policy: DiffusionPolicy


def train(cfg: RunConfig, out_dir, progress: bool = False) -> TrainResult:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    demos = load_dataset(cfg.dataset)
    if demos[0].task != cfg.task:
        raise ValueError(
            f"dataset {cfg.dataset} holds task {demos[0].task!r}, config says {cfg.task!r}")
    windows = make_windows(demos, cfg.policy.obs_horizon, cfg.policy.horizon)
    nobs, nact = windows.normalized()

    net = build_network(cfg.policy, substream(cfg.seed, "init"))
    sched = make_schedule(cfg.diffusion.schedule_kind, cfg.diffusion.train_timesteps)
    opt = AdamW(net.parameters(), lr=cfg.optim.lr, weight_decay=cfg.optim.weight_decay)
    noise_rng = substream(cfg.seed, "noise")
    shuffle_rng = substream(cfg.seed, "data-shuffle")

    n = len(windows)
    batch = cfg.optim.batch_size
    n_batches = max(1, (n + batch - 1) // batch)
    total_steps = cfg.optim.epochs * n_batches

    epoch_losses = []
    step = 0
    for epoch in range(cfg.optim.epochs):
        perm = shuffle_rng.permutation(n)
        losses = []
        for b in range(n_batches):
            idx = perm[b * batch:(b + 1) * batch]
            if len(idx) == 0:
                continue
            opt.lr = cosine_lr(cfg.optim.lr, step, total_steps)
            loss = training_loss(net, nobs[idx], nact[idx], sched, noise_rng)
            value = float(loss.data)
            if not np.isfinite(value):
                raise TrainingDiverged(f"non-finite loss at epoch {epoch} step {b}")
            ad.backward(loss)
            opt.step()
            opt.zero_grad()
            losses.append(value)
            step += 1
        epoch_losses.append(float(np.mean(losses)))
        if progress:
            print(f"epoch {epoch + 1}/{cfg.optim.epochs} loss {epoch_losses[-1]:.4f}",
                  file=sys.stderr)

    ckpt_path = out_dir / "model.ckpt"
    save_checkpoint(ckpt_path, net, cfg.to_dict(), {
        "obs": windows.obs_normalizer.to_dict(),
        "action": windows.action_normalizer.to_dict(),
    })
    record = RunRecord(config_hash=cfg.config_hash(), task=cfg.task, seed=cfg.seed,
                       epoch_losses=epoch_losses)
    record_path = out_dir / "run_record.json"
    record.save(record_path)

    policy = DiffusionPolicy(net, cfg.policy, sched, cfg.diffusion.sampler,
                             cfg.diffusion.sample_timesteps,
                             windows.obs_normalizer, windows.action_normalizer)
    return TrainResult(checkpoint_path=ckpt_path, record_path=record_path,
                       record=record, policy=policy)
