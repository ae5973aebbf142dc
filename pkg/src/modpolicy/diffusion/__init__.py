from .config import DDIM_DEFAULT_STEPS, SAMPLERS, DiffusionConfig
from .schedule import NoiseSchedule, ScheduleConfigError, make_schedule
from .sampling import (
    SampleResult,
    SamplingDiverged,
    ddim_step,
    ddpm_step,
    make_subsequence,
    q_sample,
    sample,
    training_loss,
)

__all__ = [
    "DDIM_DEFAULT_STEPS", "SAMPLERS", "DiffusionConfig",
    "NoiseSchedule", "ScheduleConfigError", "make_schedule",
    "SampleResult", "SamplingDiverged", "ddim_step", "ddpm_step",
    "make_subsequence", "q_sample", "sample", "training_loss",
]
