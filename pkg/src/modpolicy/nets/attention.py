"""Multi-head attention, the encoder block, and the modulated decoder blocks.

The decoder comes in four flavors differing in which sublayers receive the
guiding condition, and how:

    M-SelfAttention    modulated self-attn -> plain cross-attn -> modulated FFN
    M-CrossAttention   plain self-attn -> modulated cross-attn -> modulated FFN
    DIT-SelfAttention  modulated self-attn -> modulated FFN (no cross-attn)
    DIT-CrossAttention modulated cross-attn -> modulated FFN (no self-attn)

"Modulated" sublayers are pre-layer-norm without affine terms; instead a
zero-initialized linear layer maps the pooled condition to per-sublayer
(shift, scale, gate) vectors, so at construction every gated branch
vanishes and the blocks reduce to identities (plus the plain cross-attn
sublayer where present). Encoder tokens carry no positional encoding, so
all blocks are invariant to their permutation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import autodiff as ad
from ..autodiff import Linear, LayerNorm, Module, Parameter, Tensor
from .config import BlockVariant, ConfigError


@dataclass
class ModulationParams:
    """Per-sublayer conditioning triple, each of shape (batch, d_model)."""
    shift: Tensor
    scale: Tensor
    gate: Tensor


def pool_condition(enc_tokens: Tensor) -> Tensor:
    """Mean over the token axis: (B, T, d) -> (B, d)."""
    if enc_tokens.shape[-2] < 1:
        raise ValueError("pool_condition: empty token sequence")
    return ad.mean(enc_tokens, axis=-2)


def _broadcast_token_axis(v: Tensor) -> Tensor:
    # (B, d) -> (B, 1, d) so it broadcasts over tokens
    return ad.reshape(v, (v.shape[0], 1, v.shape[-1]))


def modulate(x: Tensor, shift: Tensor, scale: Tensor) -> Tensor:
    """x * (1 + scale) + shift, applied after layer norm."""
    if shift.ndim == x.ndim - 1:
        shift = _broadcast_token_axis(shift)
        scale = _broadcast_token_axis(scale)
    return ad.add(ad.add(x, ad.mul(x, scale)), shift)


def gate_residual(x: Tensor, branch: Tensor, gate: Tensor) -> Tensor:
    """x + gate * branch."""
    if gate.ndim == x.ndim - 1:
        gate = _broadcast_token_axis(gate)
    return ad.add(x, ad.mul(gate, branch))


class MultiHeadAttention(Module):
    """Scaled dot-product attention over (B, T, d) token streams."""

    def __init__(self, d_model: int, n_heads: int, rng: np.random.Generator, dtype=np.float32):
        super().__init__()
        if d_model % n_heads != 0:
            raise ConfigError(f"d_model={d_model} not divisible by n_heads={n_heads}")
        self.d_model = d_model
        self.n_heads = n_heads
        self.d_head = d_model // n_heads
        self.q_proj = Linear(d_model, d_model, rng, dtype=dtype)
        self.k_proj = Linear(d_model, d_model, rng, dtype=dtype)
        self.v_proj = Linear(d_model, d_model, rng, dtype=dtype)
        self.out_proj = Linear(d_model, d_model, rng, dtype=dtype)

    def _split_heads(self, x: Tensor, n_tokens: int) -> Tensor:
        b = x.shape[0]
        x = ad.reshape(x, (b, n_tokens, self.n_heads, self.d_head))
        return ad.transpose(x, (0, 2, 1, 3))

    def __call__(self, queries: Tensor, keys_values: Tensor) -> Tensor:
        b, tq, _ = queries.shape
        tk = keys_values.shape[1]
        q = self._split_heads(self.q_proj(queries), tq)
        k = self._split_heads(self.k_proj(keys_values), tk)
        v = self._split_heads(self.v_proj(keys_values), tk)
        scores = ad.scale(ad.matmul(q, ad.swap_last_axes(k)), 1.0 / np.sqrt(self.d_head))
        attn = ad.softmax(scores, axis=-1)
        out = ad.matmul(attn, v)                       # (B, H, Tq, dh)
        out = ad.transpose(out, (0, 2, 1, 3))
        out = ad.reshape(out, (b, tq, self.d_model))
        return self.out_proj(out)


class FeedForward(Module):
    def __init__(self, d_model: int, mult: int, rng: np.random.Generator, dtype=np.float32):
        super().__init__()
        self.fc1 = Linear(d_model, mult * d_model, rng, dtype=dtype)
        self.fc2 = Linear(mult * d_model, d_model, rng, dtype=dtype)

    def __call__(self, x: Tensor) -> Tensor:
        return self.fc2(ad.gelu(self.fc1(x)))


class ConditionModulation(Module):
    """Maps the pooled condition to (shift, scale, gate) for two sublayers.

    The single linear layer is zero-initialized, so every triple is exactly
    zero at construction.
    """

    def __init__(self, cond_dim: int, d_model: int, rng: np.random.Generator, dtype=np.float32):
        super().__init__()
        self.d_model = d_model
        self.proj = Linear(cond_dim, 6 * d_model, rng, zero_init=True, dtype=dtype)

    def __call__(self, cond: Tensor) -> tuple[ModulationParams, ModulationParams]:
        out = self.proj(ad.silu(cond))
        d = self.d_model
        parts = [out[:, i * d:(i + 1) * d] for i in range(6)]
        first = ModulationParams(shift=parts[0], scale=parts[1], gate=parts[2])
        second = ModulationParams(shift=parts[3], scale=parts[4], gate=parts[5])
        return first, second


class EncoderBlock(Module):
    """Standard pre-layer-norm encoder layer: self-attention then FFN."""

    def __init__(self, d_model: int, n_heads: int, ffn_mult: int,
                 rng: np.random.Generator, dtype=np.float32):
        super().__init__()
        self.ln1 = LayerNorm(d_model, dtype=dtype)
        self.self_attn = MultiHeadAttention(d_model, n_heads, rng, dtype=dtype)
        self.ln2 = LayerNorm(d_model, dtype=dtype)
        self.ffn = FeedForward(d_model, ffn_mult, rng, dtype=dtype)

    def __call__(self, x: Tensor) -> Tensor:
        h = self.ln1(x)
        x = ad.add(x, self.self_attn(h, h))
        return ad.add(x, self.ffn(self.ln2(x)))


class DecoderBlock(Module):
    """One decoder layer of the configured variant.

    ``cond_dim`` is the width of the pooled condition fed to the modulation
    layer (defaults to d_model). Each block owns its modulation layer.
    """

    def __init__(self, variant: BlockVariant, d_model: int, n_heads: int, ffn_mult: int,
                 rng: np.random.Generator, cond_dim: int | None = None, dtype=np.float32):
        super().__init__()
        self.variant = BlockVariant(variant)
        cond_dim = d_model if cond_dim is None else cond_dim

        if self.variant == BlockVariant.M_SELF_ATTENTION:
            self.ln_self = LayerNorm(d_model, affine=False, dtype=dtype)
            self.self_attn = MultiHeadAttention(d_model, n_heads, rng, dtype=dtype)
            self.ln_cross = LayerNorm(d_model, dtype=dtype)
            self.cross_attn = MultiHeadAttention(d_model, n_heads, rng, dtype=dtype)
        elif self.variant == BlockVariant.M_CROSS_ATTENTION:
            self.ln_self = LayerNorm(d_model, dtype=dtype)
            self.self_attn = MultiHeadAttention(d_model, n_heads, rng, dtype=dtype)
            self.ln_cross = LayerNorm(d_model, affine=False, dtype=dtype)
            self.cross_attn = MultiHeadAttention(d_model, n_heads, rng, dtype=dtype)
        elif self.variant == BlockVariant.DIT_SELF_ATTENTION:
            self.ln_self = LayerNorm(d_model, affine=False, dtype=dtype)
            self.self_attn = MultiHeadAttention(d_model, n_heads, rng, dtype=dtype)
        elif self.variant == BlockVariant.DIT_CROSS_ATTENTION:
            self.ln_cross = LayerNorm(d_model, affine=False, dtype=dtype)
            self.cross_attn = MultiHeadAttention(d_model, n_heads, rng, dtype=dtype)
        else:  # pragma: no cover - enum is exhaustive
            raise ConfigError(f"unknown decoder variant {variant!r}")

        self.ln_ffn = LayerNorm(d_model, affine=False, dtype=dtype)
        self.ffn = FeedForward(d_model, ffn_mult, rng, dtype=dtype)
        self.modulation = ConditionModulation(cond_dim, d_model, rng, dtype=dtype)

    def __call__(self, x: Tensor, enc: Tensor | None, cond: Tensor) -> Tensor:
        v = self.variant
        mod_a, mod_b = self.modulation(cond)

        if v == BlockVariant.M_SELF_ATTENTION:
            h = modulate(self.ln_self(x), mod_a.shift, mod_a.scale)
            x = gate_residual(x, self.self_attn(h, h), mod_a.gate)
            x = ad.add(x, self.cross_attn(self.ln_cross(x), enc))
        elif v == BlockVariant.M_CROSS_ATTENTION:
            h = self.ln_self(x)
            x = ad.add(x, self.self_attn(h, h))
            h = modulate(self.ln_cross(x), mod_a.shift, mod_a.scale)
            x = gate_residual(x, self.cross_attn(h, enc), mod_a.gate)
        elif v == BlockVariant.DIT_SELF_ATTENTION:
            h = modulate(self.ln_self(x), mod_a.shift, mod_a.scale)
            x = gate_residual(x, self.self_attn(h, h), mod_a.gate)
        else:  # DIT_CROSS_ATTENTION
            h = modulate(self.ln_cross(x), mod_a.shift, mod_a.scale)
            x = gate_residual(x, self.cross_attn(h, enc), mod_a.gate)

        h = modulate(self.ln_ffn(x), mod_b.shift, mod_b.scale)
        return gate_residual(x, self.ffn(h), mod_b.gate)
