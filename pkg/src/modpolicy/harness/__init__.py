from .ablate import ABLATION_CSV_HEADER, run_ablation
from .config import DEFAULT_EPOCHS, OptimConfig, RunConfig, default_config_for_task
from .evaluate import (
    EpisodeResult,
    ExpertPolicy,
    evaluate_policy,
    policy_from_checkpoint,
    rollout_episode,
)
from .records import EvalSummary, RunRecord
from .sweep import DEFAULT_SWEEP_STEPS, SWEEP_CSV_HEADER, run_sweep
from .train import TrainingDiverged, TrainResult, train

__all__ = [
    "ABLATION_CSV_HEADER", "run_ablation",
    "DEFAULT_EPOCHS", "OptimConfig", "RunConfig", "default_config_for_task",
    "EpisodeResult", "ExpertPolicy", "evaluate_policy", "policy_from_checkpoint",
    "rollout_episode", "EvalSummary", "RunRecord",
    "DEFAULT_SWEEP_STEPS", "SWEEP_CSV_HEADER", "run_sweep",
    "TrainingDiverged", "TrainResult", "train",
]
