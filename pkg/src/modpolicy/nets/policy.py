"""The trained artifact: a noise-prediction net plus everything needed to act.

``plan`` maps a raw observation window to a denormalized action trajectory
by running the configured reverse process; ``loss`` is the training
objective on normalized windows.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import autodiff as ad
from ..diffusion import NoiseSchedule, sample, training_loss
from .config import PolicyConfig
from .mtdp import MTDP
from .mudp import MUDP
from .normalizer import MinMaxNormalizer


def build_network(cfg: PolicyConfig, rng: np.random.Generator, dtype=np.float32):
    if cfg.arch == "mtdp":
        return MTDP(cfg, rng, dtype=dtype)
    return MUDP(cfg, rng, dtype=dtype)


@dataclass
class PlanResult:
    actions: np.ndarray          # (horizon, action_dim), environment units
    n_network_evals: int


class DiffusionPolicy:
    def __init__(self, net, cfg: PolicyConfig, schedule: NoiseSchedule, sampler: str,
                 sample_steps: int, obs_normalizer: MinMaxNormalizer,
                 action_normalizer: MinMaxNormalizer):
        self.net = net
        self.cfg = cfg
        self.schedule = schedule
        self.sampler = sampler
        self.sample_steps = sample_steps
        self.obs_normalizer = obs_normalizer
        self.action_normalizer = action_normalizer

    def loss(self, nobs_batch: np.ndarray, nactions_batch: np.ndarray,
             rng: np.random.Generator) -> ad.Tensor:
        return training_loss(self.net, nobs_batch, nactions_batch, self.schedule, rng)

    def plan(self, obs_window: np.ndarray, rng: np.random.Generator) -> PlanResult:
        """Denoise one action trajectory conditioned on the observation window."""
        nobs = self.obs_normalizer.normalize(obs_window)[None].astype(np.float32)
        shape = (1, self.cfg.horizon, self.cfg.action_dim)
        dtype = self.net.parameters()[0].dtype

        def eps_fn(x, t):
            out = self.net(x.astype(dtype), nobs, np.array([t]))
            return np.asarray(out.data, dtype=np.float64)

        with ad.no_grad():
            res = sample(eps_fn, shape, self.schedule, self.sampler, self.sample_steps, rng)
        actions = self.action_normalizer.denormalize(res.trajectory[0])
        return PlanResult(actions=actions, n_network_evals=res.n_network_evals)
