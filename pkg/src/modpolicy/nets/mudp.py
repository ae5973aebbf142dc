"""1-D UNet noise predictor with attention inserts in every stage.

Each down/up stage pairs a FiLM-conditioned convolutional residual block
with a modulated self-attention block applied across the stage's time
positions. The attention inserts are gated with zero-initialized
modulation, so at construction the whole network computes exactly what the
plain conditional-conv UNet computes (``conv_only=True`` forward path).

Conditioning: a timestep embedding concatenated with an embedding of the
flattened observation window; FiLM applies per-channel scale/shift inside
conv blocks, and the same vector feeds each attention insert's modulation.
"""

from __future__ import annotations

import numpy as np

from .. import autodiff as ad
from ..autodiff import Conv1d, Linear, Module, ModuleList, Tensor
from .attention import DecoderBlock
from .config import BlockVariant, PolicyConfig
from .embeddings import TimestepEmbedding


class ChannelNorm(Module):
    """Layer norm over the channel axis of (B, C, L) tensors."""

    def __init__(self, channels: int, dtype=np.float32):
        super().__init__()
        self.norm = ad.LayerNorm(channels, dtype=dtype)

    def __call__(self, x: Tensor) -> Tensor:
        return ad.swap_last_axes(self.norm(ad.swap_last_axes(x)))


class FiLMConvBlock(Module):
    """conv -> norm -> silu, FiLM scale/shift, conv -> norm -> silu, residual."""

    def __init__(self, in_channels: int, out_channels: int, cond_dim: int,
                 rng: np.random.Generator, kernel_size: int = 3, dtype=np.float32):
        super().__init__()
        self.out_channels = out_channels
        self.conv1 = Conv1d(in_channels, out_channels, kernel_size, rng, dtype=dtype)
        self.norm1 = ChannelNorm(out_channels, dtype=dtype)
        self.film = Linear(cond_dim, 2 * out_channels, rng, dtype=dtype)
        self.conv2 = Conv1d(out_channels, out_channels, kernel_size, rng, dtype=dtype)
        self.norm2 = ChannelNorm(out_channels, dtype=dtype)
        self.skip = (Conv1d(in_channels, out_channels, 1, rng, dtype=dtype)
                     if in_channels != out_channels else None)

    def __call__(self, x: Tensor, cond: Tensor) -> Tensor:
        h = ad.silu(self.norm1(self.conv1(x)))
        eff = self.film(cond)                                  # (B, 2C)
        c = self.out_channels
        scl = ad.reshape(eff[:, :c], (eff.shape[0], c, 1))
        sht = ad.reshape(eff[:, c:], (eff.shape[0], c, 1))
        h = ad.add(ad.add(h, ad.mul(h, scl)), sht)
        h = ad.silu(self.norm2(self.conv2(h)))
        res = x if self.skip is None else self.skip(x)
        return ad.add(h, res)


class AttentionInsert(Module):
    """Modulated self-attention across the time positions of one stage."""

    def __init__(self, channels: int, n_heads: int, cond_dim: int,
                 rng: np.random.Generator, dtype=np.float32):
        super().__init__()
        self.block = DecoderBlock(BlockVariant.DIT_SELF_ATTENTION, channels, n_heads,
                                  ffn_mult=4, rng=rng, cond_dim=cond_dim, dtype=dtype)

    def __call__(self, x: Tensor, cond: Tensor) -> Tensor:
        tokens = ad.swap_last_axes(x)                          # (B, L, C)
        tokens = self.block(tokens, None, cond)
        return ad.swap_last_axes(tokens)


class MUDP(Module):
    def __init__(self, cfg: PolicyConfig, rng: np.random.Generator, dtype=np.float32):
        super().__init__()
        if cfg.arch != "mudp":
            raise ValueError(f"MUDP built from config with arch={cfg.arch!r}")
        self.cfg = cfg
        d = cfg.d_model
        chans = cfg.unet_channels
        cond_dim = 2 * d

        self.t_embed = TimestepEmbedding(d, d, rng, dtype=dtype)
        self.obs_embed = Linear(cfg.obs_horizon * cfg.obs_dim, d, rng, dtype=dtype)
        self.dtype = dtype

        self.down_convs = ModuleList()
        self.down_attns = ModuleList()
        c_prev = cfg.action_dim
        for c in chans:
            self.down_convs.append(FiLMConvBlock(c_prev, c, cond_dim, rng, dtype=dtype))
            self.down_attns.append(AttentionInsert(c, cfg.n_heads, cond_dim, rng, dtype=dtype))
            c_prev = c

        self.mid_conv = FiLMConvBlock(chans[-1], chans[-1], cond_dim, rng, dtype=dtype)
        self.mid_attn = AttentionInsert(chans[-1], cfg.n_heads, cond_dim, rng, dtype=dtype)

        self.up_convs = ModuleList()
        self.up_attns = ModuleList()
        skip_chans = list(reversed(chans))                  # deepest skip first
        out_chans = skip_chans[1:] + [chans[0]]             # mirror of down path
        c_prev = chans[-1]
        for c_skip, c_out in zip(skip_chans, out_chans):
            self.up_convs.append(FiLMConvBlock(c_prev + c_skip, c_out, cond_dim, rng, dtype=dtype))
            self.up_attns.append(AttentionInsert(c_out, cfg.n_heads, cond_dim, rng, dtype=dtype))
            c_prev = c_out

        self.head_norm = ChannelNorm(chans[0], dtype=dtype)
        self.head = Conv1d(chans[0], cfg.action_dim, 3, rng, dtype=dtype)
        self.finalize_names()

    def condition_vector(self, obs, t) -> Tensor:
        arr = np.asarray(obs, dtype=self.dtype)
        if not np.isfinite(arr).all():
            raise ValueError("observation contains non-finite values")
        flat = Tensor(arr.reshape(arr.shape[0], -1))
        return ad.concat([self.t_embed(t), self.obs_embed(flat)], axis=1)

    def __call__(self, noisy_actions, obs, t, conv_only: bool = False) -> Tensor:
        x = noisy_actions if isinstance(noisy_actions, Tensor) else Tensor(noisy_actions)
        b, tp, da = x.shape
        if tp != self.cfg.horizon or da != self.cfg.action_dim:
            raise ValueError(
                f"unet input stage: input {(tp, da)} does not match "
                f"(horizon, action_dim)=({self.cfg.horizon}, {self.cfg.action_dim})")
        cond = self.condition_vector(obs, t)

        h = ad.swap_last_axes(x)                               # (B, D_a, T_p)
        skips = []
        for conv, attn in zip(self.down_convs, self.down_attns):
            h = conv(h, cond)
            if not conv_only:
                h = attn(h, cond)
            skips.append(h)
            h = ad.avg_pool1d(h, 2)

        h = self.mid_conv(h, cond)
        if not conv_only:
            h = self.mid_attn(h, cond)

        for conv, attn, skip in zip(self.up_convs, self.up_attns, reversed(skips)):
            h = ad.upsample_nearest(h, 2)
            h = conv(ad.concat([h, skip], axis=1), cond)
            if not conv_only:
                h = attn(h, cond)

        out = self.head(ad.silu(self.head_norm(h)))
        return ad.swap_last_axes(out)
