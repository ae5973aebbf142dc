"""Two deterministic point-mass tasks in the unit arena.

reach: drive the agent to a fixed goal.
avoid: same goal, but a circular obstacle sits in the way; touching it
latches failure. The scripted avoid expert detours above ("left" mode) or
below ("right" mode) the obstacle through an entry/exit corridor whose
clearance guarantees it never touches the obstacle, giving a cleanly
bimodal demonstration distribution.

Dynamics are pure float64 arithmetic: replaying stored actions reproduces
stored states bit-exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

ARENA_LO = 0.0
ARENA_HI = 1.0
MAX_SPEED = 0.05           # per-component action bound per step
GOAL_THRESHOLD = 0.03
EPISODE_CAP = 200
EXPERT_CLEARANCE = 0.10    # detour distance beyond the obstacle radius
WAYPOINT_BAND = 0.06       # |y - detour_y| tolerance before heading to the exit
START_MARGIN = 0.05        # keep-out margin around goal/obstacle when sampling starts

TASKS = ("reach", "avoid")
EXPERT_MODES = ("left", "right")  # left detours above the obstacle, right below


@dataclass(frozen=True)
class TaskSpec:
    name: str
    goal: tuple[float, float] = (0.9, 0.5)
    obstacle_center: tuple[float, float] | None = None
    obstacle_radius: float = 0.12

    @property
    def obs_dim(self) -> int:
        return 4 if self.obstacle_center is None else 6

    @property
    def action_dim(self) -> int:
        return 2


def get_task(name: str) -> TaskSpec:
    if name == "reach":
        return TaskSpec(name="reach")
    if name == "avoid":
        return TaskSpec(name="avoid", obstacle_center=(0.5, 0.5))
    raise ValueError(f"unknown task {name!r}; expected one of {TASKS}")


@dataclass
class EnvState:
    agent: np.ndarray                   # (2,) position in the unit arena
    step_count: int = 0
    done: bool = False
    entered_obstacle: bool = False


class PointEnv:
    """Cheap value-object environment; each rollout owns its own instance."""

    def __init__(self, task: TaskSpec):
        self.task = task
        self.goal = np.asarray(task.goal, dtype=np.float64)
        self.state: EnvState | None = None

    def reset(self, start: np.ndarray) -> EnvState:
        agent = np.clip(np.asarray(start, dtype=np.float64), ARENA_LO, ARENA_HI)
        state = EnvState(agent=agent)
        state.entered_obstacle = self._in_obstacle(agent)
        state.done = self._success(state)
        self.state = state
        return state

    def step(self, action: np.ndarray) -> EnvState:
        s = self.state
        if s is None:
            raise RuntimeError("step before reset")
        a = np.clip(np.asarray(action, dtype=np.float64), -MAX_SPEED, MAX_SPEED)
        agent = np.clip(s.agent + a, ARENA_LO, ARENA_HI)
        s.agent = agent
        s.step_count += 1
        if self._in_obstacle(agent):
            s.entered_obstacle = True
        s.done = self._success(s)
        return s

    def observe(self) -> np.ndarray:
        """Observation vector: agent, goal, and (avoid task) obstacle center."""
        s = self.state
        parts = [s.agent, self.goal]
        if self.task.obstacle_center is not None:
            parts.append(np.asarray(self.task.obstacle_center, dtype=np.float64))
        return np.concatenate(parts)

    def _in_obstacle(self, pos: np.ndarray) -> bool:
        c = self.task.obstacle_center
        if c is None:
            return False
        return float(np.hypot(pos[0] - c[0], pos[1] - c[1])) < self.task.obstacle_radius

    def _success(self, s: EnvState) -> bool:
        at_goal = float(np.hypot(*(s.agent - self.goal))) < GOAL_THRESHOLD
        if self.task.obstacle_center is None:
            return at_goal
        return at_goal and not s.entered_obstacle


def _toward(pos: np.ndarray, target: np.ndarray) -> np.ndarray:
    """Proportional step toward target, norm-clamped to the speed limit."""
    v = target - pos
    dist = float(np.hypot(v[0], v[1]))
    if dist <= MAX_SPEED:
        return v
    return v * (MAX_SPEED / dist)


def expert_action(state: EnvState, task: TaskSpec, mode: str = "none") -> np.ndarray:
    """Scripted controller: straight-line for reach, waypoint detour for avoid."""
    pos = state.agent
    goal = np.asarray(task.goal, dtype=np.float64)
    if task.obstacle_center is None:
        return _toward(pos, goal)

    if mode not in EXPERT_MODES:
        raise ValueError(f"avoid expert needs mode in {EXPERT_MODES}, got {mode!r}")
    cx, cy = task.obstacle_center
    detour = task.obstacle_radius + EXPERT_CLEARANCE
    y_w = cy + detour if mode == "left" else cy - detour
    entry_x, exit_x = cx - detour, cx + detour

    if pos[0] >= exit_x:
        return _toward(pos, goal)
    if pos[0] >= entry_x and abs(pos[1] - y_w) <= WAYPOINT_BAND:
        return _toward(pos, np.array([exit_x, y_w]))
    return _toward(pos, np.array([entry_x, y_w]))


def sample_start(task: TaskSpec, rng: np.random.Generator) -> np.ndarray:
    """Uniform start position, excluding margins around goal and obstacle.

    For the avoid task, starts are restricted to the region left of the
    obstacle corridor so every episode must pass the obstacle on one side.
    """
    goal = np.asarray(task.goal)
    if task.obstacle_center is None:
        lo, hi = ARENA_LO + START_MARGIN, ARENA_HI - START_MARGIN
        while True:
            p = rng.uniform(lo, hi, size=2)
            if np.hypot(*(p - goal)) > GOAL_THRESHOLD + START_MARGIN:
                return p
    cx = task.obstacle_center[0]
    x_max = cx - task.obstacle_radius - EXPERT_CLEARANCE - START_MARGIN
    p = np.empty(2)
    p[0] = rng.uniform(ARENA_LO + START_MARGIN, x_max)
    p[1] = rng.uniform(ARENA_LO + START_MARGIN, ARENA_HI - START_MARGIN)
    return p


def run_expert_episode(task: TaskSpec, start: np.ndarray, mode: str = "none",
                       cap: int = EPISODE_CAP) -> tuple[np.ndarray, np.ndarray, bool]:
    """Roll the scripted expert; returns (states, actions, success)."""
    env = PointEnv(task)
    state = env.reset(start)
    states, actions = [], []
    while not state.done and state.step_count < cap:
        a = expert_action(state, task, mode)
        states.append(state.agent.copy())
        actions.append(a.copy())
        state = env.step(a)
    return np.asarray(states), np.asarray(actions), state.done


def classify_mode(positions: np.ndarray, task: TaskSpec) -> str:
    """Label a trajectory by the side on which it first crosses the obstacle.

    Returns "left" (above the obstacle center), "right" (below), or "none"
    if the trajectory never crosses the obstacle's x coordinate.
    """
    if task.obstacle_center is None:
        return "none"
    cx, cy = task.obstacle_center
    xs, ys = positions[:, 0], positions[:, 1]
    for i in range(len(xs) - 1):
        if xs[i] < cx <= xs[i + 1]:
            frac = (cx - xs[i]) / (xs[i + 1] - xs[i])
            y_cross = ys[i] + frac * (ys[i + 1] - ys[i])
            return "left" if y_cross > cy else "right"
    return "none"
