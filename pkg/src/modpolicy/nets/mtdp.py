"""Transformer encoder-decoder noise predictor.

Condition tokens (one timestep token plus one token per observation step)
run through a self-attention encoder; noisy action tokens run through a
stack of modulated decoder blocks that see the encoder output both as
cross-attention memory and, pooled, as the modulation input. Decoder
tokens carry a learned positional encoding; condition tokens none.
"""

from __future__ import annotations

import numpy as np

from .. import autodiff as ad
from ..autodiff import LayerNorm, Linear, Module, ModuleList, Parameter, Tensor
from .attention import DecoderBlock, EncoderBlock, pool_condition
from .config import PolicyConfig
from .embeddings import ObsEncoder, TimestepEmbedding


class MTDP(Module):
    def __init__(self, cfg: PolicyConfig, rng: np.random.Generator, dtype=np.float32):
        super().__init__()
        if cfg.arch != "mtdp":
            raise ValueError(f"MTDP built from config with arch={cfg.arch!r}")
        self.cfg = cfg
        d = cfg.d_model

        self.t_embed = TimestepEmbedding(d, d, rng, dtype=dtype)
        self.obs_encoder = ObsEncoder(cfg.obs_dim, d, rng, dtype=dtype)
        self.encoder = ModuleList(
            [EncoderBlock(d, cfg.n_heads, cfg.ffn_mult, rng, dtype=dtype)
             for _ in range(cfg.n_encoder_layers)])
        self.encoder_norm = LayerNorm(d, dtype=dtype)

        self.action_embed = Linear(cfg.action_dim, d, rng, dtype=dtype)
        self.pos_embed = Parameter(
            (0.02 * rng.standard_normal((cfg.horizon, d))).astype(dtype))
        self.decoder = ModuleList(
            [DecoderBlock(cfg.variant, d, cfg.n_heads, cfg.ffn_mult, rng, dtype=dtype)
             for _ in range(cfg.n_decoder_layers)])
        self.final_norm = LayerNorm(d, dtype=dtype)
        self.head = Linear(d, cfg.action_dim, rng, zero_init=True, dtype=dtype)
        self.finalize_names()

    def condition_tokens(self, obs, t) -> Tensor:
        t_tok = self.t_embed(t)                                    # (B, d)
        t_tok = ad.reshape(t_tok, (t_tok.shape[0], 1, t_tok.shape[-1]))
        obs_tok = self.obs_encoder(obs)                            # (B, T_o, d)
        return ad.concat([t_tok, obs_tok], axis=1)

    def encode(self, obs, t) -> Tensor:
        x = self.condition_tokens(obs, t)
        for block in self.encoder:
            x = block(x)
        return self.encoder_norm(x)

    def __call__(self, noisy_actions, obs, t) -> Tensor:
        x = noisy_actions if isinstance(noisy_actions, Tensor) else Tensor(noisy_actions)
        b, tp, da = x.shape
        if tp != self.cfg.horizon or da != self.cfg.action_dim:
            raise ValueError(
                f"action embed stage: input {(tp, da)} does not match "
                f"(horizon, action_dim)=({self.cfg.horizon}, {self.cfg.action_dim})")
        enc = self.encode(obs, t)
        cond = pool_condition(enc)
        h = ad.add(self.action_embed(x), self.pos_embed)
        for block in self.decoder:
            h = block(h, enc, cond)
        return self.head(self.final_norm(h))
