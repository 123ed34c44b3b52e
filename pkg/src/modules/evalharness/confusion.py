"""
Matriz de confusión: filas = clase real, columnas = clase predicha
"""
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from core.errors import DimensionError, LabelError


@dataclass(frozen=True)
class ConfusionMatrix:
    counts: np.ndarray  # [C, C] int64

    @property
    def num_classes(self) -> int:
        return int(self.counts.shape[0])

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def tp(self, c: int) -> int:
        return int(self.counts[c, c])

    def fp(self, c: int) -> int:
        return int(self.counts[:, c].sum() - self.counts[c, c])

    def fn(self, c: int) -> int:
        return int(self.counts[c, :].sum() - self.counts[c, c])

    def tn(self, c: int) -> int:
        return self.total - self.tp(c) - self.fp(c) - self.fn(c)


def confusion(true_labels: Sequence[int], predicted_labels: Sequence[int], num_classes: int) -> ConfusionMatrix:
    true = np.asarray(true_labels, dtype=np.int64)
    pred = np.asarray(predicted_labels, dtype=np.int64)
    if true.shape != pred.shape or true.ndim != 1:
        raise DimensionError(f"confusion: {true.shape} etiquetas reales y {pred.shape} predichas")
    for name, values in (("real", true), ("predicha", pred)):
        bad = values[(values < 0) | (values >= num_classes)]
        if bad.size:
            raise LabelError(f"Etiqueta {name} {int(bad[0])} fuera de 0..{num_classes - 1}")
    counts = np.zeros((num_classes, num_classes), dtype=np.int64)
    np.add.at(counts, (true, pred), 1)
    return ConfusionMatrix(counts)
