from .attention import (
    ConditionModulation,
    DecoderBlock,
    EncoderBlock,
    FeedForward,
    ModulationParams,
    MultiHeadAttention,
    gate_residual,
    modulate,
    pool_condition,
)
from .checkpoint import CheckpointError, load_checkpoint, restore_parameters, save_checkpoint
from .config import ARCHS, BlockVariant, ConfigError, PolicyConfig
from .embeddings import ObsEncoder, TimestepEmbedding, sinusoidal_timestep_embedding
from .mtdp import MTDP
from .mudp import MUDP, AttentionInsert, ChannelNorm, FiLMConvBlock
from .normalizer import MinMaxNormalizer
from .policy import DiffusionPolicy, PlanResult, build_network

__all__ = [
    "ConditionModulation", "DecoderBlock", "EncoderBlock", "FeedForward",
    "ModulationParams", "MultiHeadAttention", "gate_residual", "modulate",
    "pool_condition", "CheckpointError", "load_checkpoint", "restore_parameters",
    "save_checkpoint", "ARCHS", "BlockVariant", "ConfigError", "PolicyConfig",
    "ObsEncoder", "TimestepEmbedding", "sinusoidal_timestep_embedding",
    "MTDP", "MUDP", "AttentionInsert", "ChannelNorm", "FiLMConvBlock",
    "MinMaxNormalizer", "DiffusionPolicy", "PlanResult", "build_network",
]
