"""
Contenedor en memoria de un dataset de fotogramas etiquetados
"""
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, List, Optional

import numpy as np

from core.errors import DimensionError

SPLITS = ("train", "test")


@dataclass
class Dataset:
    """
    images: [N,3,S,S] float64 en [0,1]
    labels: [N] int64
    splits: [N] "train" | "test"
    ids: identificador estable de cada fotograma (ruta relativa sin extensión)
    """
    images: np.ndarray
    labels: np.ndarray
    splits: np.ndarray
    ids: List[str] = field(default_factory=list)
    root: Optional[Path] = None

    def __post_init__(self):
        self.images = np.asarray(self.images, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        self.splits = np.asarray(self.splits, dtype=object)
        if not self.ids:
            self.ids = [f"frame_{i:06d}" for i in range(len(self.labels))]
        n = len(self.labels)
        if self.images.shape[0] != n or self.splits.shape[0] != n or len(self.ids) != n:
            raise DimensionError(
                f"Dataset incoherente: {self.images.shape[0]} imágenes, {n} etiquetas, "
                f"{self.splits.shape[0]} splits, {len(self.ids)} ids"
            )

    def __len__(self) -> int:
        return len(self.labels)

    @property
    def image_size(self) -> int:
        return int(self.images.shape[-1]) if len(self) else 0

    @property
    def class_ids(self) -> List[int]:
        return sorted(int(c) for c in np.unique(self.labels))

    def subset(self, split: Optional[str] = None, classes: Optional[Iterable[int]] = None) -> "Dataset":
        mask = np.ones(len(self), dtype=bool)
        if split is not None:
            mask &= self.splits == split
        if classes is not None:
            mask &= np.isin(self.labels, list(classes))
        idx = np.flatnonzero(mask)
        return Dataset(
            images=self.images[idx],
            labels=self.labels[idx],
            splits=self.splits[idx],
            ids=[self.ids[i] for i in idx],
            root=self.root,
        )
