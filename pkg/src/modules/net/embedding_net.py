"""
Red de embedding f(x): imagen [3,H,W] -> vector de embedding_dim
"""
from typing import Dict, Iterator, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from loguru import logger

from core import ops
from core.errors import ConfigError, DimensionError
from core.rng import stream
from core.tensor import Tensor, as_array, no_grad

from .presets import (
    ArchPreset, ConvSpec, GapSpec, LayerSpec, LinearSpec, PoolSpec, ReluSpec, SkipAddSpec, get_preset,
)

INPUT_CHANNELS = 3
MIN_INPUT_SIZE = 32


class EmbeddingNet:
    """
    Backbone convolucional con parámetros indexados por ruta de capa

    Los parámetros viven en un dict ordenado ("layers.0.weight", ...);
    forward acepta overrides para evaluar la red con otros tensores
    (comprobación de gradientes, shards data-parallel).
    """

    def __init__(self, preset: ArchPreset, params: Dict[str, Tensor], normalize: bool = False):
        self.preset = preset
        self.params = params
        self.normalize = normalize

    @property
    def embedding_dim(self) -> int:
        return self.preset.embedding_dim

    @property
    def num_classes(self) -> Optional[int]:
        head = self.params.get("head.weight")
        return None if head is None else head.shape[0]

    def backbone_parameters(self) -> Dict[str, Tensor]:
        return {k: v for k, v in self.params.items() if not k.startswith("head.")}

    def parameter_count(self) -> int:
        return sum(t.size for t in self.params.values())

    @property
    def feature_channels(self) -> int:
        return feature_channels(self.preset)

    def attach_head(self, num_classes: int) -> None:
        """
        Cabeza lineal de C clases para el clasificador baseline; arranca en cero

        Sustituye a la capa linear final: los logits salen directamente del
        global average pooling y la red deja de producir embeddings.
        """
        if num_classes < 2:
            raise ConfigError(f"El clasificador necesita al menos 2 clases: {num_classes}")
        final = final_linear_path(self.preset)
        self.params.pop(f"{final}.weight", None)
        self.params.pop(f"{final}.bias", None)
        self.params["head.weight"] = Tensor(np.zeros((num_classes, self.feature_channels)), requires_grad=True)
        self.params["head.bias"] = Tensor(np.zeros(num_classes), requires_grad=True)

    def forward(self, x: Tensor, overrides: Optional[Mapping[str, Tensor]] = None) -> Tensor:
        if self.num_classes is not None:
            raise ConfigError("Una red con cabeza de clasificación no produce embeddings")
        params = self.params if not overrides else {**self.params, **overrides}
        out = _run_layers(self.preset.layer_spec, x, params, "layers")
        if self.normalize:
            out = ops.l2_normalize_rows(out)
        return out

    def logits(self, x: Tensor, overrides: Optional[Mapping[str, Tensor]] = None) -> Tensor:
        if self.num_classes is None:
            raise ConfigError("La red no tiene cabeza de clasificación")
        params = self.params if not overrides else {**self.params, **overrides}
        return ops.linear(self.features(x, overrides), params["head.weight"], params["head.bias"])

    def features(self, x: Tensor, overrides: Optional[Mapping[str, Tensor]] = None) -> Tensor:
        """Salida del global average pooling [N, feature_channels], sin la capa linear final"""
        params = self.params if not overrides else {**self.params, **overrides}
        return _run_layers(self.preset.layer_spec[:-1], x, params, "layers")


def _run_layers(specs: Sequence[LayerSpec], x: Tensor, params: Mapping[str, Tensor], prefix: str) -> Tensor:
    for i, spec in enumerate(specs):
        path = f"{prefix}.{i}"
        if isinstance(spec, ConvSpec):
            x = ops.conv2d(x, params[f"{path}.weight"], spec.stride, spec.padding, bias=params[f"{path}.bias"])
        elif isinstance(spec, ReluSpec):
            x = ops.relu(x)
        elif isinstance(spec, PoolSpec):
            x = ops.maxpool2d(x, spec.window, spec.stride)
        elif isinstance(spec, GapSpec):
            x = ops.global_avg_pool(x)
        elif isinstance(spec, LinearSpec):
            x = ops.linear(x, params[f"{path}.weight"], params[f"{path}.bias"])
        elif isinstance(spec, SkipAddSpec):
            x = ops.add(x, _run_layers(spec.body, x, params, f"{path}.body"))
    return x


def parameter_shapes(preset: ArchPreset) -> Dict[str, Tuple[int, ...]]:
    """Formas de todos los parámetros del preset, en orden de inicialización"""
    shapes: Dict[str, Tuple[int, ...]] = {}

    def walk(specs: Sequence[LayerSpec], channels: int, prefix: str) -> int:
        for i, spec in enumerate(specs):
            path = f"{prefix}.{i}"
            if isinstance(spec, ConvSpec):
                shapes[f"{path}.weight"] = (spec.out_channels, channels, spec.kernel, spec.kernel)
                shapes[f"{path}.bias"] = (spec.out_channels,)
                channels = spec.out_channels
            elif isinstance(spec, LinearSpec):
                shapes[f"{path}.weight"] = (spec.out_features, channels)
                shapes[f"{path}.bias"] = (spec.out_features,)
                channels = spec.out_features
            elif isinstance(spec, SkipAddSpec):
                body_channels = walk(spec.body, channels, f"{path}.body")
                if body_channels != channels:
                    raise ConfigError(f"{path}: la rama residual cambia los canales {channels} -> {body_channels}")
        return channels

    walk(preset.layer_spec, INPUT_CHANNELS, "layers")
    return shapes


def final_linear_path(preset: ArchPreset) -> str:
    return f"layers.{len(preset.layer_spec) - 1}"


def feature_channels(preset: ArchPreset) -> int:
    """Canales que llegan a la capa linear final (entrada de la cabeza del clasificador)"""
    return parameter_shapes(preset)[f"{final_linear_path(preset)}.weight"][1]


def _fan_in(shape: Tuple[int, ...]) -> int:
    return int(np.prod(shape[1:]))


def build(preset, rng_seed: int, embedding_dim: int = 128, normalize: bool = False) -> EmbeddingNet:
    """
    Construye la red con inicialización He-uniform (fan-in) y bias a cero

    Args:
        preset: ArchPreset o nombre de preset registrado
        rng_seed: semilla maestra; se usa el sub-stream "init"
    """
    if isinstance(preset, str):
        preset = get_preset(preset, embedding_dim)
    rng = stream(rng_seed, "init")
    params: Dict[str, Tensor] = {}
    for path, shape in parameter_shapes(preset).items():
        if path.endswith(".bias"):
            values = np.zeros(shape)
        else:
            limit = np.sqrt(6.0 / _fan_in(shape))
            values = rng.uniform(-limit, limit, size=shape)
        params[path] = Tensor(values, requires_grad=True, name=path)

    net = EmbeddingNet(preset, params, normalize=normalize)
    logger.debug(f"🧱 {preset.name}: {net.parameter_count()} parámetros")
    return net


def validate_batch(batch: np.ndarray) -> None:
    if batch.ndim != 4 or batch.shape[1] != INPUT_CHANNELS:
        raise DimensionError(f"Se espera un lote [N,3,H,W], recibido {batch.shape}")
    h, w = batch.shape[2], batch.shape[3]
    if h != w:
        raise DimensionError(f"Entrada no cuadrada: {h}x{w}")
    if h < MIN_INPUT_SIZE:
        raise DimensionError(f"Entrada de {h}px menor que el mínimo {MIN_INPUT_SIZE}px")


def embed(net: EmbeddingNet, batch, requires_grad: bool = False) -> Tensor:
    """
    Embeddings [N, embedding_dim] de un lote [N,3,H,W]

    Sin gradiente, cada imagen se evalúa por separado: el resultado de una
    imagen no depende del resto del lote.
    """
    data = as_array(batch)
    validate_batch(data)
    if requires_grad:
        return net.forward(batch if isinstance(batch, Tensor) else Tensor(data))

    with no_grad():
        rows = [net.forward(Tensor(data[i:i + 1])).data[0] for i in range(data.shape[0])]
    return Tensor(np.stack(rows))


def iter_embeddings(net: EmbeddingNet, images: np.ndarray, chunk: int = 64) -> Iterator[np.ndarray]:
    """Embeddings por bloques para datasets grandes"""
    for start in range(0, images.shape[0], chunk):
        yield embed(net, images[start:start + chunk]).data


def embed_all(net: EmbeddingNet, images: np.ndarray) -> np.ndarray:
    parts: List[np.ndarray] = list(iter_embeddings(net, images))
    if not parts:
        return np.zeros((0, net.embedding_dim))
    return np.concatenate(parts, axis=0)
