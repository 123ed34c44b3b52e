"""
Almacén de embeddings en JSON-lines

Una línea por fotograma: {"id": str, "label": int | null, "vec": [floats]}
Los vectores se escriben con 17 dígitos significativos.
"""
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Union

import numpy as np
from loguru import logger
from pydantic import BaseModel, ValidationError

from core.errors import DatasetIOError, DatasetLoadError, DimensionError


class EmbeddingRecord(BaseModel):
    """Registro validado de una línea del almacén"""
    id: str
    label: Optional[int] = None
    vec: List[float]


@dataclass
class EmbeddingStore:
    ids: List[str]
    labels: List[Optional[int]]
    vectors: np.ndarray  # [N, D]

    def __len__(self) -> int:
        return len(self.ids)

    @property
    def dim(self) -> int:
        return int(self.vectors.shape[1]) if self.vectors.ndim == 2 and len(self) else 0

    def label_array(self) -> np.ndarray:
        """Etiquetas como int64; falla si algún registro no está etiquetado"""
        missing = [i for i, l in zip(self.ids, self.labels) if l is None]
        if missing:
            raise DatasetLoadError(f"Registros sin etiqueta: {missing[:5]}{'...' if len(missing) > 5 else ''}")
        return np.asarray(self.labels, dtype=np.int64)


def format_record(frame_id: str, label: Optional[int], vec: Iterable[float]) -> str:
    values = ", ".join(format(float(v), ".17g") for v in vec)
    label_text = "null" if label is None else str(int(label))
    return f'{{"id": {json.dumps(frame_id)}, "label": {label_text}, "vec": [{values}]}}'


def write_embeddings(
    path: Union[str, Path],
    ids: Sequence[str],
    labels: Sequence[Optional[int]],
    vectors: np.ndarray,
) -> Path:
    vectors = np.asarray(vectors, dtype=np.float64)
    if not (len(ids) == len(labels) == vectors.shape[0]):
        raise DimensionError(f"write_embeddings: {len(ids)} ids, {len(labels)} etiquetas, {vectors.shape[0]} vectores")
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", encoding="utf-8", newline="\n") as fh:
            for frame_id, label, vec in zip(ids, labels, vectors):
                fh.write(format_record(frame_id, label, vec) + "\n")
    except OSError as e:
        raise DatasetIOError(f"No se pudo escribir {path}: {e}") from e
    logger.info(f"💾 {len(ids)} embeddings escritos en {path}")
    return path


def read_embeddings(path: Union[str, Path]) -> EmbeddingStore:
    """
    Raises:
        DatasetLoadError: fichero ilegible, línea inválida o dimensiones incoherentes
    """
    path = Path(path)
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as e:
        raise DatasetLoadError(f"No se pudo leer el almacén de embeddings {path}: {e}") from e

    records: List[EmbeddingRecord] = []
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            records.append(EmbeddingRecord.model_validate_json(line))
        except ValidationError as e:
            raise DatasetLoadError(f"{path}:{lineno}: registro inválido: {e.errors()[0]['msg']}") from e

    dims = {len(r.vec) for r in records}
    if len(dims) > 1:
        raise DatasetLoadError(f"{path}: vectores de longitudes distintas {sorted(dims)}")
    vectors = np.array([r.vec for r in records], dtype=np.float64) if records else np.zeros((0, 0))
    return EmbeddingStore([r.id for r in records], [r.label for r in records], vectors)
