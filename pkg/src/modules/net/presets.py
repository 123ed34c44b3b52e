"""
Presets de arquitectura (miniaturas de AlexNet / VGG / ResNet)

Cada preset conserva el rasgo de su familia:
- alex-lite: kernel inicial grande + pooling agresivo
- vgg-lite: convoluciones 3x3 apiladas
- res-lite: conexiones residuales (skip-add)
Todos terminan en global average pooling + linear → embedding_dim, así
que aceptan cualquier entrada cuadrada ≥ 32 px.
"""
from dataclasses import dataclass
from typing import Callable, Dict, List, Tuple, Union

from core.errors import ConfigError


@dataclass(frozen=True)
class ConvSpec:
    out_channels: int
    kernel: int
    stride: int = 1
    padding: int = 0


@dataclass(frozen=True)
class PoolSpec:
    window: int
    stride: int


@dataclass(frozen=True)
class ReluSpec:
    pass


@dataclass(frozen=True)
class GapSpec:
    """Global average pooling [N,C,H,W] -> [N,C]"""


@dataclass(frozen=True)
class LinearSpec:
    out_features: int


@dataclass(frozen=True)
class SkipAddSpec:
    """Bloque residual: salida = entrada + body(entrada)"""
    body: Tuple["LayerSpec", ...]


LayerSpec = Union[ConvSpec, PoolSpec, ReluSpec, GapSpec, LinearSpec, SkipAddSpec]


@dataclass(frozen=True)
class ArchPreset:
    name: str
    layer_spec: Tuple[LayerSpec, ...]
    embedding_dim: int = 128

    def __post_init__(self):
        if not self.layer_spec or not isinstance(self.layer_spec[-1], LinearSpec):
            raise ConfigError(f"Preset '{self.name}': la última capa debe ser linear")
        if self.layer_spec[-1].out_features != self.embedding_dim:
            raise ConfigError(f"Preset '{self.name}': la capa final no emite {self.embedding_dim}")


# Registry de presets
_PRESET_REGISTRY: Dict[str, Callable[[int], List[LayerSpec]]] = {}


def register_preset(name: str):
    """Decorator para registrar un preset"""
    def decorator(builder: Callable[[int], List[LayerSpec]]):
        _PRESET_REGISTRY[name] = builder
        return builder
    return decorator


def get_preset(name: str, embedding_dim: int = 128) -> ArchPreset:
    """
    Devuelve el preset `name` con la dimensión de embedding pedida

    Raises:
        ConfigError: si el preset no está registrado
    """
    if name not in _PRESET_REGISTRY:
        raise ConfigError(
            f"Preset '{name}' desconocido. Disponibles: {available_presets()}"
        )
    if embedding_dim < 1:
        raise ConfigError(f"embedding_dim debe ser positivo: {embedding_dim}")
    return ArchPreset(name=name, layer_spec=tuple(_PRESET_REGISTRY[name](embedding_dim)), embedding_dim=embedding_dim)


def available_presets() -> List[str]:
    return sorted(_PRESET_REGISTRY)


@register_preset("alex-lite")
def _alex_lite(embedding_dim: int) -> List[LayerSpec]:
    return [
        ConvSpec(16, kernel=7, stride=2, padding=3), ReluSpec(), PoolSpec(3, 2),
        ConvSpec(32, kernel=5, padding=2), ReluSpec(), PoolSpec(3, 2),
        ConvSpec(64, kernel=3, padding=1), ReluSpec(),
        GapSpec(),
        LinearSpec(embedding_dim),
    ]


@register_preset("vgg-lite")
def _vgg_lite(embedding_dim: int) -> List[LayerSpec]:
    return [
        ConvSpec(8, 3, padding=1), ReluSpec(), ConvSpec(8, 3, padding=1), ReluSpec(), PoolSpec(2, 2),
        ConvSpec(16, 3, padding=1), ReluSpec(), ConvSpec(16, 3, padding=1), ReluSpec(), PoolSpec(2, 2),
        ConvSpec(32, 3, padding=1), ReluSpec(), ConvSpec(32, 3, padding=1), ReluSpec(), PoolSpec(2, 2),
        GapSpec(),
        LinearSpec(embedding_dim),
    ]


@register_preset("res-lite")
def _res_lite(embedding_dim: int) -> List[LayerSpec]:
    return [
        ConvSpec(16, 3, stride=2, padding=1), ReluSpec(),
        SkipAddSpec((ConvSpec(16, 3, padding=1), ReluSpec(), ConvSpec(16, 3, padding=1))), ReluSpec(),
        PoolSpec(2, 2),
        ConvSpec(32, 3, padding=1), ReluSpec(),
        SkipAddSpec((ConvSpec(32, 3, padding=1), ReluSpec(), ConvSpec(32, 3, padding=1))), ReluSpec(),
        PoolSpec(2, 2),
        GapSpec(),
        LinearSpec(embedding_dim),
    ]
