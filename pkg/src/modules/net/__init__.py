"""
Backbones de embedding, presets y checkpoints
"""
from .presets import (
    ArchPreset, ConvSpec, PoolSpec, ReluSpec, GapSpec, LinearSpec, SkipAddSpec,
    register_preset, get_preset, available_presets,
)
from .embedding_net import (
    EmbeddingNet, build, embed, embed_all, feature_channels, parameter_shapes, validate_batch,
)
from .checkpoint import (
    Checkpoint, save_checkpoint, load_checkpoint, read_checkpoint, encode_checkpoint, decode_checkpoint,
)

__all__ = [
    # Presets
    'ArchPreset', 'ConvSpec', 'PoolSpec', 'ReluSpec', 'GapSpec', 'LinearSpec', 'SkipAddSpec',
    'register_preset', 'get_preset', 'available_presets',

    # Red
    'EmbeddingNet', 'build', 'embed', 'embed_all', 'feature_channels', 'parameter_shapes', 'validate_batch',

    # Checkpoints
    'Checkpoint', 'save_checkpoint', 'load_checkpoint', 'read_checkpoint',
    'encode_checkpoint', 'decode_checkpoint',
]
