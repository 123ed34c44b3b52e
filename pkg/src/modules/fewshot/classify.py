"""
Clasificación k-shot por distancia mínima al support set
"""
from dataclasses import dataclass
from typing import Dict, List

import numpy as np

from core.errors import ConfigError, DimensionError

from .support import SupportSet

AGGREGATIONS = ("min", "mean")
_CHUNK = 256


@dataclass(frozen=True)
class Prediction:
    class_id: int
    scores: Dict[int, float]

    @property
    def score(self) -> float:
        return self.scores[self.class_id]


def class_scores(queries: np.ndarray, support: SupportSet, aggregate: str = "min") -> np.ndarray:
    """
    Puntuación [M, C] de cada consulta contra cada clase

    min: distancia L2 al cuadrado al exemplar más cercano de la clase
    mean: media de las distancias a los k exemplares
    """
    if aggregate not in AGGREGATIONS:
        raise ConfigError(f"Agregación desconocida '{aggregate}', opciones: {AGGREGATIONS}")
    queries = np.asarray(queries, dtype=np.float64)
    if queries.ndim != 2 or queries.shape[1] != support.dim:
        raise DimensionError(f"Consultas {queries.shape} incompatibles con support de dimensión {support.dim}")

    reduce = np.min if aggregate == "min" else np.mean
    out = np.empty((queries.shape[0], len(support.classes)))
    for start in range(0, queries.shape[0], _CHUNK):
        q = queries[start:start + _CHUNK]
        diff = q[:, None, None, :] - support.exemplars[None, :, :, :]
        out[start:start + _CHUNK] = reduce((diff * diff).sum(axis=-1), axis=-1)
    return out


def classify_batch(queries: np.ndarray, support: SupportSet, aggregate: str = "min") -> List[Prediction]:
    scores = class_scores(queries, support, aggregate)
    # np.argmin devuelve la primera ocurrencia: empate -> id de clase menor
    winners = np.argmin(scores, axis=1)
    return [
        Prediction(
            class_id=support.classes[int(w)],
            scores={c: float(s) for c, s in zip(support.classes, row)},
        )
        for w, row in zip(winners, scores)
    ]


def classify(query: np.ndarray, support: SupportSet, aggregate: str = "min") -> Prediction:
    query = np.asarray(query, dtype=np.float64)
    if query.ndim != 1:
        raise DimensionError(f"classify espera un vector, recibido {query.shape}")
    return classify_batch(query[None, :], support, aggregate)[0]


def predicted_labels(predictions: List[Prediction]) -> np.ndarray:
    return np.array([p.class_id for p in predictions], dtype=np.int64)
