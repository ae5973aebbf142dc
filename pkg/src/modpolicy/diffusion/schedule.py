"""Noise schedules: the coefficient tables driving forward noising and sampling.

Arrays are float64 and 1-indexed by timestep via ``[t-1]``; ``alpha_bar_at(0)``
is defined as 1 so reverse steps can land on t=0 cleanly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

SCHEDULE_KINDS = ("cosine", "linear")
COSINE_S = 0.008
BETA_MAX = 0.999
LINEAR_BETA_START = 1e-4
LINEAR_BETA_END = 0.02


class ScheduleConfigError(ValueError):
    pass


@dataclass(frozen=True)
class NoiseSchedule:
    kind: str
    timesteps: int                 # number of training diffusion steps
    beta: np.ndarray               # beta[t-1] in (0, 1)
    alpha: np.ndarray              # 1 - beta
    alpha_bar: np.ndarray          # cumulative product of alpha
    sigma: np.ndarray = field(repr=False)  # posterior std; sigma[0] == 0

    def alpha_bar_at(self, t: int) -> float:
        if t == 0:
            return 1.0
        return float(self.alpha_bar[t - 1])

    def check_timestep(self, t: int):
        if not 1 <= t <= self.timesteps:
            raise ValueError(f"timestep t={t} outside [1, {self.timesteps}]")


def make_schedule(kind: str, timesteps: int) -> NoiseSchedule:
    if timesteps < 1:
        raise ScheduleConfigError(f"timesteps must be >= 1, got {timesteps}")
    if kind == "cosine":
        beta = _cosine_betas(timesteps)
    elif kind == "linear":
        beta = np.linspace(LINEAR_BETA_START, LINEAR_BETA_END, timesteps, dtype=np.float64)
    else:
        raise ScheduleConfigError(f"unknown schedule kind {kind!r}; expected one of {SCHEDULE_KINDS}")

    alpha = 1.0 - beta
    alpha_bar = np.cumprod(alpha)
    sigma = np.zeros(timesteps, dtype=np.float64)
    if timesteps > 1:
        prev_bar = np.concatenate(([1.0], alpha_bar[:-1]))
        var = beta * (1.0 - prev_bar) / (1.0 - alpha_bar)
        sigma[1:] = np.sqrt(var[1:])
    return NoiseSchedule(kind=kind, timesteps=timesteps, beta=beta, alpha=alpha,
                         alpha_bar=alpha_bar, sigma=sigma)


def _cosine_betas(timesteps: int) -> np.ndarray:
    def f(step: float) -> float:
        return math.cos((step / timesteps + COSINE_S) / (1.0 + COSINE_S) * math.pi / 2.0) ** 2

    f0 = f(0.0)
    bars = np.array([f(s) / f0 for s in range(timesteps + 1)])
    beta = 1.0 - bars[1:] / bars[:-1]
    return np.clip(beta, 0.0, BETA_MAX)
