"""Forward noising, the training objective, and the reverse recursions.

The reverse steps use the standard epsilon-prediction forms:

    DDPM:  x_{t-1} = (x_t - (1-a_t)/sqrt(1-abar_t) * eps_hat) / sqrt(a_t)
                     + sigma_t * z,   z ~ N(0, I), z = 0 at t = 1
    DDIM:  x0_pred  = (x_t - sqrt(1-abar_t) * eps_hat) / sqrt(abar_t)
           x_{t'}   = sqrt(abar_{t'}) * x0_pred + sqrt(1-abar_{t'}) * eps_hat

with abar_0 = 1 and the DDIM step fully deterministic (no stochastic term).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import autodiff as ad
from .schedule import NoiseSchedule


class SamplingDiverged(RuntimeError):
    """Non-finite values appeared during iterative denoising."""


def q_sample(x0: np.ndarray, t, eps: np.ndarray, sched: NoiseSchedule) -> np.ndarray:
    """Noise clean data to timestep t: sqrt(abar_t) x0 + sqrt(1-abar_t) eps.

    ``t`` is a single int or an int array with one timestep per leading
    batch element of ``x0``.
    """
    x0 = np.asarray(x0)
    eps = np.asarray(eps)
    if x0.shape != eps.shape:
        raise ValueError(f"q_sample: x0 shape {x0.shape} != eps shape {eps.shape}")
    t_arr = np.atleast_1d(np.asarray(t, dtype=np.int64))
    if np.any(t_arr < 1) or np.any(t_arr > sched.timesteps):
        raise ValueError(f"timestep(s) {t} outside [1, {sched.timesteps}]")
    abar = sched.alpha_bar[t_arr - 1]
    if np.ndim(t) == 0:
        abar = abar[0]
    else:
        abar = abar.reshape((-1,) + (1,) * (x0.ndim - 1))
    c0 = np.sqrt(abar)
    c1 = np.sqrt(1.0 - abar)
    return (c0 * x0 + c1 * eps).astype(x0.dtype, copy=False)


def training_loss(model, obs_batch: np.ndarray, action_batch: np.ndarray,
                  sched: NoiseSchedule, rng: np.random.Generator) -> ad.Tensor:
    """Mean squared error between the true noise and the model's prediction.

    ``model(noisy_actions, obs, t)`` must return an ``ad.Tensor`` shaped like
    the normalized ``action_batch``. One timestep is drawn uniformly from
    [1, T] per batch element.
    """
    if len(action_batch) == 0:
        raise ValueError("training_loss: empty batch")
    if len(obs_batch) != len(action_batch):
        raise ValueError(
            f"training_loss: obs batch {len(obs_batch)} != action batch {len(action_batch)}")
    t = rng.integers(1, sched.timesteps + 1, size=len(action_batch))
    eps = rng.standard_normal(action_batch.shape).astype(action_batch.dtype)
    noisy = q_sample(action_batch, t, eps, sched)
    eps_hat = model(noisy, obs_batch, t)
    diff = ad.sub(eps_hat, ad.Tensor(eps))
    return ad.mean(ad.mul(diff, diff))


def ddpm_step(x_t: np.ndarray, eps_hat: np.ndarray, t: int, sched: NoiseSchedule,
              rng: np.random.Generator | None) -> np.ndarray:
    """One stochastic reverse step x_t -> x_{t-1}; no noise is added at t=1."""
    sched.check_timestep(t)
    alpha_t = sched.alpha[t - 1]
    abar_t = sched.alpha_bar[t - 1]
    mean = (x_t - (1.0 - alpha_t) / np.sqrt(1.0 - abar_t) * eps_hat) / np.sqrt(alpha_t)
    if t > 1 and rng is not None:
        sigma_t = sched.sigma[t - 1]
        if sigma_t > 0.0:
            mean = mean + sigma_t * rng.standard_normal(x_t.shape)
    return mean.astype(x_t.dtype, copy=False)


def ddim_step(x_t: np.ndarray, eps_hat: np.ndarray, t: int, t_prev: int,
              sched: NoiseSchedule) -> np.ndarray:
    """Deterministic reverse step x_t -> x_{t_prev}; t_prev = 0 is the output."""
    sched.check_timestep(t)
    if t_prev >= t:
        raise ValueError(f"ddim_step: t_prev={t_prev} must be < t={t}")
    if t_prev < 0:
        raise ValueError(f"ddim_step: t_prev={t_prev} must be >= 0")
    abar_t = sched.alpha_bar_at(t)
    abar_prev = sched.alpha_bar_at(t_prev)
    x0_pred = (x_t - np.sqrt(1.0 - abar_t) * eps_hat) / np.sqrt(abar_t)
    out = np.sqrt(abar_prev) * x0_pred + np.sqrt(1.0 - abar_prev) * eps_hat
    return out.astype(x_t.dtype, copy=False)


def make_subsequence(train_steps: int, sample_steps: int) -> list[tuple[int, int]]:
    """Uniform-stride decreasing (t, t_prev) pairs from train_steps down to 0.

    Length is exactly ``sample_steps``; the first pair starts at
    ``train_steps`` and the last lands on 0.
    """
    if train_steps < 1:
        raise ValueError(f"train_steps must be >= 1, got {train_steps}")
    if not 1 <= sample_steps <= train_steps:
        raise ValueError(
            f"sample_steps must be in [1, {train_steps}], got {sample_steps}")
    grid = np.linspace(train_steps, 0.0, sample_steps + 1)
    times = np.rint(grid).astype(int)
    return [(int(a), int(b)) for a, b in zip(times[:-1], times[1:])]


@dataclass
class SampleResult:
    trajectory: np.ndarray
    n_network_evals: int


def sample(eps_fn, shape: tuple[int, ...], sched: NoiseSchedule, sampler: str,
           sample_steps: int, rng: np.random.Generator) -> SampleResult:
    """Run the full reverse process from x_T ~ N(0, I) in normalized space.

    ``eps_fn(x, t)`` returns the predicted noise for array ``x`` at integer
    timestep ``t``. DDPM visits every t from T down to 1; DDIM follows the
    uniform-stride subsequence of length ``sample_steps`` ending at 0.
    """
    x = rng.standard_normal(shape)
    n_evals = 0
    if sampler == "ddpm":
        if sample_steps != sched.timesteps:
            raise ValueError("ddpm sampling must use every training timestep")
        steps = [(t, t - 1) for t in range(sched.timesteps, 0, -1)]
    elif sampler == "ddim":
        steps = make_subsequence(sched.timesteps, sample_steps)
    else:
        raise ValueError(f"unknown sampler {sampler!r}")

    for t, t_prev in steps:
        eps_hat = eps_fn(x, t)
        n_evals += 1
        if sampler == "ddpm":
            x = ddpm_step(x, eps_hat, t, sched, rng)
        else:
            x = ddim_step(x, eps_hat, t, t_prev, sched)
        if not np.isfinite(x).all():
            raise SamplingDiverged(
                f"non-finite values while stepping t={t} -> {t_prev} ({sampler})")
    return SampleResult(trajectory=x, n_network_evals=n_evals)
