"""
Persistencia binaria de checkpoints

Formato (little-endian):
    magic "LV2V" | version u32 | len u32 + nombre de preset | embedding_dim u32 | n u32
    n entradas: len u32 + ruta | rank u32 | dims u32[rank] | payload f64[]
    metadata: len u32 + JSON UTF-8 (claves ordenadas)
"""
import json
import math
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Union

import numpy as np
from loguru import logger

from core.errors import CheckpointError, ConfigError
from core.tensor import Tensor

from .embedding_net import EmbeddingNet, feature_channels, final_linear_path, parameter_shapes
from .presets import get_preset

MAGIC = b"LV2V"
FORMAT_VERSION = 1


@dataclass
class Checkpoint:
    """Parámetros de una red + metadata de entrenamiento"""
    preset: str
    embedding_dim: int
    params: Dict[str, np.ndarray]
    metadata: Dict[str, Any] = field(default_factory=dict)

    @classmethod
    def from_net(cls, net: EmbeddingNet, metadata: Dict[str, Any] = None) -> "Checkpoint":
        meta = dict(metadata or {})
        meta.setdefault("embedding_dim", net.embedding_dim)
        meta.setdefault("normalize", net.normalize)
        return cls(
            preset=net.preset.name,
            embedding_dim=net.embedding_dim,
            params={k: t.data.copy() for k, t in net.params.items()},
            metadata=meta,
        )

    @property
    def train_classes(self):
        return self.metadata.get("train_classes")

    def to_net(self) -> EmbeddingNet:
        try:
            preset = get_preset(self.preset, self.embedding_dim)
        except ConfigError as e:
            raise CheckpointError(f"Checkpoint con preset inválido: {e}") from e
        try:
            declared = int(self.metadata.get("embedding_dim", self.embedding_dim))
        except (TypeError, ValueError) as e:
            raise CheckpointError(f"embedding_dim inválido en la metadata: {e}") from e
        if declared != self.embedding_dim:
            raise CheckpointError(
                f"embedding_dim de la metadata ({self.metadata['embedding_dim']}) "
                f"no coincide con la cabecera ({self.embedding_dim})"
            )

        expected = parameter_shapes(preset)
        if "head.weight" in self.params:
            if self.params["head.weight"].ndim != 2:
                raise CheckpointError(f"head.weight de rango {self.params['head.weight'].ndim}, se espera 2")
            classes = self.params["head.weight"].shape[0]
            final = final_linear_path(preset)
            del expected[f"{final}.weight"], expected[f"{final}.bias"]
            expected["head.weight"] = (classes, feature_channels(preset))
            expected["head.bias"] = (classes,)
        if set(expected) != set(self.params):
            missing = sorted(set(expected) - set(self.params))
            extra = sorted(set(self.params) - set(expected))
            raise CheckpointError(f"Parámetros incoherentes con '{self.preset}': faltan {missing}, sobran {extra}")
        for path, shape in expected.items():
            if self.params[path].shape != shape:
                raise CheckpointError(f"{path}: forma {self.params[path].shape} != {shape} del preset")

        params = {path: Tensor(self.params[path].copy(), requires_grad=True, name=path) for path in expected}
        return EmbeddingNet(preset, params, normalize=bool(self.metadata.get("normalize", False)))


def _pack_str(text: str) -> bytes:
    raw = text.encode("utf-8")
    return struct.pack("<I", len(raw)) + raw


def encode_checkpoint(ckpt: Checkpoint) -> bytes:
    parts = [
        MAGIC,
        struct.pack("<I", FORMAT_VERSION),
        _pack_str(ckpt.preset),
        struct.pack("<II", ckpt.embedding_dim, len(ckpt.params)),
    ]
    for path, values in ckpt.params.items():
        parts.append(_pack_str(path))
        parts.append(struct.pack(f"<I{values.ndim}I", values.ndim, *values.shape))
        parts.append(np.ascontiguousarray(values, dtype="<f8").tobytes())
    parts.append(_pack_str(json.dumps(ckpt.metadata, sort_keys=True)))
    return b"".join(parts)


class _Reader:
    def __init__(self, raw: bytes):
        self.raw = raw
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.raw):
            raise CheckpointError(f"Checkpoint truncado en el byte {self.pos} (faltan {self.pos + n - len(self.raw)})")
        chunk = self.raw[self.pos:self.pos + n]
        self.pos += n
        return chunk

    def u32(self) -> int:
        return struct.unpack("<I", self.take(4))[0]

    def text(self) -> str:
        try:
            return self.take(self.u32()).decode("utf-8")
        except UnicodeDecodeError as e:
            raise CheckpointError(f"Cadena corrupta en el checkpoint: {e}") from e


def decode_checkpoint(raw: bytes) -> Checkpoint:
    reader = _Reader(raw)
    if reader.take(4) != MAGIC:
        raise CheckpointError("Cabecera inválida: no es un checkpoint LV2V")
    version = reader.u32()
    if version != FORMAT_VERSION:
        raise CheckpointError(f"Versión de checkpoint {version} no soportada (esperada {FORMAT_VERSION})")
    preset = reader.text()
    embedding_dim = reader.u32()
    count = reader.u32()

    params: Dict[str, np.ndarray] = {}
    for _ in range(count):
        path = reader.text()
        rank = reader.u32()
        dims = struct.unpack(f"<{rank}I", reader.take(4 * rank))
        n = math.prod(dims)
        if 8 * n > len(raw) - reader.pos:
            raise CheckpointError(f"{path}: dims {list(dims)} exigen {8 * n} bytes, quedan {len(raw) - reader.pos}")
        payload = np.frombuffer(reader.take(8 * n), dtype="<f8")
        params[path] = payload.astype(np.float64).reshape(dims)

    try:
        metadata = json.loads(reader.text())
    except json.JSONDecodeError as e:
        raise CheckpointError(f"Metadata corrupta: {e}") from e
    if not isinstance(metadata, dict):
        raise CheckpointError(f"La metadata debe ser un objeto JSON, no {type(metadata).__name__}")
    if reader.pos != len(raw):
        raise CheckpointError(f"{len(raw) - reader.pos} bytes sobrantes tras la metadata")
    return Checkpoint(preset=preset, embedding_dim=embedding_dim, params=params, metadata=metadata)


def save_checkpoint(net: Union[EmbeddingNet, Checkpoint], path: Union[str, Path], metadata: Dict[str, Any] = None) -> Path:
    ckpt = net if isinstance(net, Checkpoint) else Checkpoint.from_net(net, metadata)
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(encode_checkpoint(ckpt))
    except OSError as e:
        raise CheckpointError(f"No se pudo escribir {path}: {e}") from e
    logger.info(f"💾 Checkpoint {ckpt.preset} guardado en {path}")
    return path


def read_checkpoint(path: Union[str, Path]) -> Checkpoint:
    try:
        raw = Path(path).read_bytes()
    except OSError as e:
        raise CheckpointError(f"No se pudo leer {path}: {e}") from e
    return decode_checkpoint(raw)


def load_checkpoint(path: Union[str, Path]) -> EmbeddingNet:
    return read_checkpoint(path).to_net()
