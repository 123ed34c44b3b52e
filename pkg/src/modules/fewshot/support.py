"""
Support sets k-shot
"""
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

from core.errors import DimensionError, SupportError


@dataclass(frozen=True)
class SupportSet:
    """k exemplares por clase; exemplars[c] corresponde a classes[c], clases en orden ascendente"""
    classes: Tuple[int, ...]
    exemplars: np.ndarray  # [C, k, D]
    k: int

    def __post_init__(self):
        ex = np.array(self.exemplars, dtype=np.float64, copy=True)
        if ex.ndim != 3 or ex.shape[0] != len(self.classes) or ex.shape[1] != self.k:
            raise DimensionError(
                f"SupportSet: exemplars {ex.shape} incoherente con {len(self.classes)} clases y k={self.k}"
            )
        if len(set(self.classes)) != len(self.classes):
            raise SupportError(f"SupportSet: clases repetidas {list(self.classes)}")
        classes = [int(c) for c in self.classes]
        order = np.argsort(classes, kind="stable")
        ex = np.ascontiguousarray(ex[order])
        ex.setflags(write=False)
        object.__setattr__(self, "exemplars", ex)
        object.__setattr__(self, "classes", tuple(classes[i] for i in order))

    @property
    def dim(self) -> int:
        return int(self.exemplars.shape[2])

    @classmethod
    def from_mapping(cls, exemplars_by_class) -> "SupportSet":
        classes = sorted(exemplars_by_class)
        stacked = np.stack([np.asarray(exemplars_by_class[c], dtype=np.float64) for c in classes])
        return cls(tuple(classes), stacked, int(stacked.shape[1]))


def build_support(
    embeddings: np.ndarray,
    labels: Sequence[int],
    k: int,
    rng: np.random.Generator,
) -> Tuple[SupportSet, np.ndarray]:
    """
    Aparta k exemplares aleatorios por clase; el resto forma el pool de consultas

    Returns:
        (SupportSet, índices de consulta en orden ascendente)

    Raises:
        SupportError: alguna clase tiene ≤ k muestras
    """
    embeddings = np.asarray(embeddings, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    if k < 1:
        raise SupportError(f"k debe ser ≥ 1, recibido {k}")
    if embeddings.ndim != 2 or embeddings.shape[0] != labels.shape[0]:
        raise DimensionError(f"build_support: embeddings {embeddings.shape} y {labels.shape[0]} etiquetas")

    chosen, used = [], []
    classes = sorted(int(c) for c in np.unique(labels))
    for c in classes:
        members = np.flatnonzero(labels == c)
        if members.size <= k:
            raise SupportError(f"La clase {c} tiene {members.size} muestras, se necesitan más de k={k}")
        picks = np.sort(rng.choice(members, size=k, replace=False))
        chosen.append(embeddings[picks])
        used.append(picks)

    queries = np.setdiff1d(np.arange(labels.shape[0]), np.concatenate(used))
    return SupportSet(tuple(classes), np.stack(chosen), k), queries
