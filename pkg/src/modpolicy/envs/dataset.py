"""Demonstration files and training-window construction.

Dataset format: UTF-8 JSON lines, one episode per line with keys
{task, seed, mode, states, actions}; states are agent positions. A
companion ``<name>.stats.json`` records per-dimension min/max over
observation vectors and actions. JSON float serialization round-trips
exactly, so replaying a stored episode reproduces its states bit for bit.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..nets.normalizer import MinMaxNormalizer
from .tasks import EPISODE_CAP, EXPERT_MODES, PointEnv, TaskSpec, get_task, run_expert_episode, sample_start


@dataclass
class Demonstration:
    task: str
    seed: int
    mode: str
    states: np.ndarray          # (L, 2) agent positions
    actions: np.ndarray         # (L, 2) velocity commands


def stats_path_for(dataset_path) -> Path:
    p = Path(dataset_path)
    return p.with_name(p.name + ".stats.json")


def generate_demos(task_name: str, n_episodes: int, seed: int, out_path) -> list[Demonstration]:
    """Write a demonstration dataset; deterministic given the seed."""
    if n_episodes < 1:
        raise ValueError(f"n_episodes must be >= 1, got {n_episodes}")
    task = get_task(task_name)
    master = np.random.default_rng(seed)
    episode_seeds = master.integers(0, 2**31 - 1, size=n_episodes)

    demos = []
    for ep_seed in episode_seeds:
        rng = np.random.default_rng(int(ep_seed))
        start = sample_start(task, rng)
        mode = "none"
        if task.obstacle_center is not None:
            mode = EXPERT_MODES[int(rng.random() < 0.5)]
        states, actions, success = run_expert_episode(task, start, mode)
        if not success:
            raise RuntimeError(
                f"scripted expert failed on {task_name} (episode seed {ep_seed})")
        demos.append(Demonstration(task=task_name, seed=int(ep_seed), mode=mode,
                                   states=states, actions=actions))

    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    with out_path.open("w", encoding="utf-8") as f:
        for d in demos:
            line = json.dumps({
                "task": d.task, "seed": d.seed, "mode": d.mode,
                "states": d.states.tolist(), "actions": d.actions.tolist(),
            }, separators=(",", ":"))
            f.write(line + "\n")
    _write_stats(demos, task, stats_path_for(out_path))
    return demos


def load_dataset(path) -> list[Demonstration]:
    demos = []
    with Path(path).open("r", encoding="utf-8") as f:
        for line in f:
            row = json.loads(line)
            demos.append(Demonstration(
                task=row["task"], seed=row["seed"], mode=row["mode"],
                states=np.asarray(row["states"], dtype=np.float64),
                actions=np.asarray(row["actions"], dtype=np.float64)))
    if not demos:
        raise ValueError(f"{path}: empty dataset")
    return demos


def replay_episode(demo: Demonstration) -> np.ndarray:
    """Re-run stored actions from the initial state; returns visited states."""
    task = get_task(demo.task)
    env = PointEnv(task)
    state = env.reset(demo.states[0])
    visited = [state.agent.copy()]
    for a in demo.actions[:-1]:
        state = env.step(a)
        visited.append(state.agent.copy())
    return np.asarray(visited)


def episode_observations(states: np.ndarray, task: TaskSpec) -> np.ndarray:
    """Stack per-step observation vectors: agent, goal, optional obstacle."""
    n = len(states)
    goal = np.tile(np.asarray(task.goal, dtype=np.float64), (n, 1))
    cols = [states, goal]
    if task.obstacle_center is not None:
        cols.append(np.tile(np.asarray(task.obstacle_center, dtype=np.float64), (n, 1)))
    return np.concatenate(cols, axis=1)


def dataset_stats(demos: list[Demonstration], task: TaskSpec) -> tuple[MinMaxNormalizer, MinMaxNormalizer]:
    obs = np.concatenate([episode_observations(d.states, task) for d in demos])
    actions = np.concatenate([d.actions for d in demos])
    return MinMaxNormalizer.from_data(obs), MinMaxNormalizer.from_data(actions)


def _write_stats(demos, task, path: Path):
    obs_norm, act_norm = dataset_stats(demos, task)
    blob = {"task": task.name, "states": obs_norm.to_dict(), "actions": act_norm.to_dict()}
    path.write_text(json.dumps(blob, indent=2, sort_keys=True) + "\n", encoding="utf-8")


@dataclass
class WindowDataset:
    obs: np.ndarray             # (N, T_o, D_o) raw observation windows
    actions: np.ndarray         # (N, T_p, D_a) raw action windows
    obs_normalizer: MinMaxNormalizer
    action_normalizer: MinMaxNormalizer

    def __len__(self):
        return len(self.obs)

    def normalized(self) -> tuple[np.ndarray, np.ndarray]:
        nobs = self.obs_normalizer.normalize(self.obs).astype(np.float32)
        nact = self.action_normalizer.normalize(self.actions).astype(np.float32)
        return nobs, nact


def make_windows(demos: list[Demonstration], obs_horizon: int, horizon: int) -> WindowDataset:
    """One training window per (episode, timestep).

    Observation windows look back ``obs_horizon`` steps, edge-padded with
    the first observation; action windows look forward ``horizon`` steps,
    padded by repeating the final action.
    """
    task = get_task(demos[0].task)
    obs_windows, act_windows = [], []
    for d in demos:
        obs_seq = episode_observations(d.states, task)
        length = len(d.states)
        for k in range(length):
            idx = np.clip(np.arange(k - obs_horizon + 1, k + 1), 0, length - 1)
            obs_windows.append(obs_seq[idx])
            aidx = np.clip(np.arange(k, k + horizon), 0, length - 1)
            act_windows.append(d.actions[aidx])
    obs_arr = np.asarray(obs_windows)
    act_arr = np.asarray(act_windows)
    obs_norm, act_norm = dataset_stats(demos, task)
    return WindowDataset(obs=obs_arr, actions=act_arr,
                         obs_normalizer=obs_norm, action_normalizer=act_norm)
