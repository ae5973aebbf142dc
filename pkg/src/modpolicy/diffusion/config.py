"""Sampler configuration: training steps, sampler choice, sampling steps."""

from __future__ import annotations

from dataclasses import dataclass

from .schedule import SCHEDULE_KINDS, ScheduleConfigError

SAMPLERS = ("ddpm", "ddim")
DDIM_DEFAULT_STEPS = 60


@dataclass
class DiffusionConfig:
    train_timesteps: int = 100
    sampler: str = "ddpm"
    sample_timesteps: int | None = None
    schedule_kind: str = "cosine"

    def __post_init__(self):
        self.sampler = self.sampler.lower()
        if self.sampler not in SAMPLERS:
            raise ScheduleConfigError(f"sampler must be one of {SAMPLERS}, got {self.sampler!r}")
        if self.schedule_kind not in SCHEDULE_KINDS:
            raise ScheduleConfigError(
                f"schedule_kind must be one of {SCHEDULE_KINDS}, got {self.schedule_kind!r}")
        if self.train_timesteps < 1:
            raise ScheduleConfigError(f"train_timesteps must be >= 1, got {self.train_timesteps}")
        if self.sampler == "ddpm":
            if self.sample_timesteps not in (None, self.train_timesteps):
                raise ScheduleConfigError(
                    "ddpm uses every training timestep; sample_timesteps must be "
                    f"unset or {self.train_timesteps}")
            self.sample_timesteps = self.train_timesteps
        else:
            if self.sample_timesteps is None:
                self.sample_timesteps = min(DDIM_DEFAULT_STEPS, self.train_timesteps)
            if not 1 <= self.sample_timesteps <= self.train_timesteps:
                raise ScheduleConfigError(
                    f"sample_timesteps must be in [1, {self.train_timesteps}], "
                    f"got {self.sample_timesteps}")

    def to_dict(self) -> dict:
        return {"train_timesteps": self.train_timesteps, "sampler": self.sampler,
                "sample_timesteps": self.sample_timesteps, "schedule_kind": self.schedule_kind}

    @classmethod
    def from_dict(cls, d: dict) -> "DiffusionConfig":
        return cls(**d)
