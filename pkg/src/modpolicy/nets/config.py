"""Network configuration shared by the transformer and UNet denoisers."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum


class ConfigError(ValueError):
    pass


class BlockVariant(str, Enum):
    M_SELF_ATTENTION = "M-SelfAttention"
    M_CROSS_ATTENTION = "M-CrossAttention"
    DIT_SELF_ATTENTION = "DIT-SelfAttention"
    DIT_CROSS_ATTENTION = "DIT-CrossAttention"


ARCHS = ("mtdp", "mudp")


@dataclass
class PolicyConfig:
    d_model: int = 64
    n_heads: int = 4
    n_encoder_layers: int = 2
    n_decoder_layers: int = 4
    variant: BlockVariant = BlockVariant.M_SELF_ATTENTION
    arch: str = "mtdp"
    horizon: int = 16           # predicted action steps T_p
    obs_horizon: int = 2        # observed steps T_o
    action_horizon: int = 8     # executed steps T_a per replanning cycle
    action_dim: int = 2
    obs_dim: int = 4
    unet_channels: tuple[int, ...] = (32, 64)
    ffn_mult: int = 4

    def __post_init__(self):
        if isinstance(self.variant, str):
            self.variant = BlockVariant(self.variant)
        if isinstance(self.unet_channels, list):
            self.unet_channels = tuple(self.unet_channels)
        self.validate()

    def validate(self):
        if self.arch not in ARCHS:
            raise ConfigError(f"arch must be one of {ARCHS}, got {self.arch!r}")
        if self.d_model % self.n_heads != 0:
            raise ConfigError(
                f"d_model={self.d_model} not divisible by n_heads={self.n_heads}")
        if self.obs_horizon < 1:
            raise ConfigError(f"obs_horizon must be >= 1, got {self.obs_horizon}")
        if self.action_horizon > self.horizon:
            raise ConfigError(
                f"action_horizon={self.action_horizon} exceeds horizon={self.horizon}")
        if self.arch == "mudp":
            stages = len(self.unet_channels)
            if stages < 1:
                raise ConfigError("unet_channels must be non-empty for mudp")
            if self.horizon % (2 ** stages) != 0:
                raise ConfigError(
                    f"horizon={self.horizon} not divisible by 2^{stages} down stages")
            for c in self.unet_channels:
                if c % self.n_heads != 0:
                    raise ConfigError(
                        f"unet channel {c} not divisible by n_heads={self.n_heads}")

    def to_dict(self) -> dict:
        return {
            "d_model": self.d_model, "n_heads": self.n_heads,
            "n_encoder_layers": self.n_encoder_layers,
            "n_decoder_layers": self.n_decoder_layers,
            "variant": self.variant.value, "arch": self.arch,
            "horizon": self.horizon, "obs_horizon": self.obs_horizon,
            "action_horizon": self.action_horizon,
            "action_dim": self.action_dim, "obs_dim": self.obs_dim,
            "unet_channels": list(self.unet_channels), "ffn_mult": self.ffn_mult,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PolicyConfig":
        return cls(**{**d, "unet_channels": tuple(d.get("unet_channels", (32, 64)))})
