"""Receding-horizon evaluation rollouts.

Predict ``horizon`` actions, execute the first ``action_horizon``,
re-observe, repeat until success or the episode cap. Episodes are driven
by per-(seed, episode) RNG substreams and reduced in episode order, so an
evaluation is exactly reproducible.
"""

from __future__ import annotations

import time
from collections import deque
from dataclasses import dataclass

import numpy as np

from ..diffusion import DiffusionConfig, make_schedule
from ..envs import EPISODE_CAP, PointEnv, classify_mode, expert_action, get_task, sample_start
from ..nets import (
    DiffusionPolicy,
    MinMaxNormalizer,
    PlanResult,
    PolicyConfig,
    build_network,
    load_checkpoint,
    restore_parameters,
)
from ..rng import substream
from .config import RunConfig
from .records import EvalSummary


class ExpertPolicy:
    """Scripted expert behind the planning interface; the evaluation oracle."""

    def __init__(self, task_name: str, horizon: int, action_horizon: int, obs_horizon: int):
        self.task = get_task(task_name)
        self.cfg = PolicyConfig(arch="mtdp", horizon=horizon, obs_horizon=obs_horizon,
                                action_horizon=action_horizon, obs_dim=self.task.obs_dim)
        self._mode = "none"

    def reset_episode(self, rng: np.random.Generator):
        if self.task.obstacle_center is not None:
            self._mode = ["left", "right"][int(rng.random() < 0.5)]

    def plan(self, obs_window: np.ndarray, rng: np.random.Generator) -> PlanResult:
        env = PointEnv(self.task)
        state = env.reset(obs_window[-1][:2])
        actions = []
        for _ in range(self.cfg.horizon):
            a = expert_action(state, self.task, self._mode)
            actions.append(a)
            state = env.step(a)
        return PlanResult(actions=np.asarray(actions), n_network_evals=0)


@dataclass
class EpisodeResult:
    success: bool
    steps: int
    mode: str
    n_network_evals: int | None
    plan_seconds: list[float]


def rollout_episode(policy, task_name: str, rng: np.random.Generator) -> EpisodeResult:
    task = get_task(task_name)
    env = PointEnv(task)
    state = env.reset(sample_start(task, rng))
    if hasattr(policy, "reset_episode"):
        policy.reset_episode(rng)

    obs_horizon = policy.cfg.obs_horizon
    action_horizon = policy.cfg.action_horizon
    history = deque([env.observe()] * obs_horizon, maxlen=obs_horizon)
    positions = [state.agent.copy()]
    evals = None
    plan_seconds = []

    while not state.done and state.step_count < EPISODE_CAP:
        window = np.stack(history)
        t0 = time.perf_counter()
        plan = policy.plan(window, rng)
        plan_seconds.append(time.perf_counter() - t0)
        if plan.n_network_evals:
            evals = plan.n_network_evals
        for action in plan.actions[:action_horizon]:
            state = env.step(action)
            history.append(env.observe())
            positions.append(state.agent.copy())
            if state.done or state.step_count >= EPISODE_CAP:
                break
    return EpisodeResult(success=state.done, steps=state.step_count,
                         mode=classify_mode(np.asarray(positions), task),
                         n_network_evals=evals, plan_seconds=plan_seconds)


def evaluate_policy(policy, task_name: str, n_episodes: int,
                    seeds: list[int]) -> tuple[EvalSummary, float]:
    """Success statistics over n_episodes rollouts for each evaluation seed.

    Returns the (deterministic) summary and the measured mean wall-clock
    seconds per planning call, kept separate because timing is not
    reproducible.
    """
    rates = []
    mode_counts = {"left": 0, "right": 0, "none": 0}
    evals = None
    all_plan_seconds = []
    for seed in seeds:
        wins = 0
        for i in range(n_episodes):
            rng = substream(seed, f"eval-episode-{i}")
            res = rollout_episode(policy, task_name, rng)
            wins += res.success
            mode_counts[res.mode] += 1
            if res.n_network_evals is not None:
                evals = res.n_network_evals
            all_plan_seconds.extend(res.plan_seconds)
        rates.append(wins / n_episodes)
    summary = EvalSummary(
        seeds=list(seeds), n_episodes=n_episodes, success_rates=rates,
        mean=float(np.mean(rates)), std=float(np.std(rates)),
        mode_counts=mode_counts, network_evals_per_trajectory=evals)
    mean_plan_seconds = float(np.mean(all_plan_seconds)) if all_plan_seconds else 0.0
    return summary, mean_plan_seconds


def policy_from_checkpoint(path, sampler: str | None = None,
                           sample_timesteps: int | None = None
                           ) -> tuple[DiffusionPolicy, RunConfig]:
    """Rebuild a runnable policy from a checkpoint, with optional sampler override."""
    manifest, params = load_checkpoint(path)
    cfg = RunConfig.from_dict(manifest["config"])
    net = build_network(cfg.policy, substream(cfg.seed, "init"))
    restore_parameters(net, params)
    diff = cfg.diffusion
    if sampler is not None or sample_timesteps is not None:
        diff = DiffusionConfig(
            train_timesteps=cfg.diffusion.train_timesteps,
            sampler=sampler or cfg.diffusion.sampler,
            sample_timesteps=sample_timesteps,
            schedule_kind=cfg.diffusion.schedule_kind)
    sched = make_schedule(diff.schedule_kind, diff.train_timesteps)
    policy = DiffusionPolicy(
        net, cfg.policy, sched, diff.sampler, diff.sample_timesteps,
        MinMaxNormalizer.from_dict(manifest["normalizers"]["obs"]),
        MinMaxNormalizer.from_dict(manifest["normalizers"]["action"]))
    return policy, cfg
