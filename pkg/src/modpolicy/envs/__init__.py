from .tasks import (
    ARENA_HI,
    ARENA_LO,
    EPISODE_CAP,
    EXPERT_MODES,
    GOAL_THRESHOLD,
    MAX_SPEED,
    TASKS,
    EnvState,
    PointEnv,
    TaskSpec,
    classify_mode,
    expert_action,
    get_task,
    run_expert_episode,
    sample_start,
)
from .dataset import (
    Demonstration,
    WindowDataset,
    dataset_stats,
    episode_observations,
    generate_demos,
    load_dataset,
    make_windows,
    replay_episode,
    stats_path_for,
)

__all__ = [
    "ARENA_HI", "ARENA_LO", "EPISODE_CAP", "EXPERT_MODES", "GOAL_THRESHOLD",
    "MAX_SPEED", "TASKS", "EnvState", "PointEnv", "TaskSpec", "classify_mode",
    "expert_action", "get_task", "run_expert_episode", "sample_start",
    "Demonstration", "WindowDataset", "dataset_stats", "episode_observations",
    "generate_demos", "load_dataset", "make_windows", "replay_episode",
    "stats_path_for",
]
