"""Timestep and observation embeddings feeding the guiding condition."""

from __future__ import annotations

import math

import numpy as np

from .. import autodiff as ad
from ..autodiff import Linear, Module, Tensor
from .config import ConfigError


def sinusoidal_timestep_embedding(t, dim: int) -> np.ndarray:
    """Classic (sin | cos) embedding of integer timesteps; shape (B, dim).

    At t=0 all sine components are 0 and all cosine components are 1.
    """
    if dim % 2 != 0:
        raise ConfigError(f"timestep embedding dim must be even, got {dim}")
    t = np.atleast_1d(np.asarray(t, dtype=np.float64))
    if np.any(t < 0):
        raise ValueError(f"timesteps must be >= 0, got {t.min()}")
    half = dim // 2
    freqs = np.exp(-math.log(10000.0) * np.arange(half) / half)
    angles = t[:, None] * freqs[None, :]
    return np.concatenate([np.sin(angles), np.cos(angles)], axis=-1)


class TimestepEmbedding(Module):
    """Sinusoidal features passed through a two-layer MLP to out_dim."""

    def __init__(self, sinusoid_dim: int, out_dim: int, rng: np.random.Generator, dtype=np.float32):
        super().__init__()
        if sinusoid_dim % 2 != 0:
            raise ConfigError(f"timestep embedding dim must be even, got {sinusoid_dim}")
        self.sinusoid_dim = sinusoid_dim
        self.dtype = dtype
        self.fc1 = Linear(sinusoid_dim, out_dim, rng, dtype=dtype)
        self.fc2 = Linear(out_dim, out_dim, rng, dtype=dtype)

    def __call__(self, t) -> Tensor:
        emb = sinusoidal_timestep_embedding(t, self.sinusoid_dim).astype(self.dtype)
        return self.fc2(ad.silu(self.fc1(Tensor(emb))))


class ObsEncoder(Module):
    """Per-step MLP from raw observation vectors to condition tokens.

    (B, T_o, obs_dim) -> (B, T_o, d_model); the same MLP is applied at every
    observation step.
    """

    def __init__(self, obs_dim: int, d_model: int, rng: np.random.Generator, dtype=np.float32):
        super().__init__()
        self.fc1 = Linear(obs_dim, d_model, rng, dtype=dtype)
        self.fc2 = Linear(d_model, d_model, rng, dtype=dtype)
        self.dtype = dtype

    def __call__(self, obs) -> Tensor:
        arr = obs.data if isinstance(obs, Tensor) else np.asarray(obs)
        if not np.isfinite(arr).all():
            raise ValueError("observation contains non-finite values")
        x = obs if isinstance(obs, Tensor) else Tensor(arr.astype(self.dtype))
        return self.fc2(ad.gelu(self.fc1(x)))
