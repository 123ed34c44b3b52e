"""
Muestreo aleatorio de tripletas (ancla, positivo, negativo)
"""
from dataclasses import dataclass
from typing import Dict, List, Sequence

import numpy as np

from core.errors import ContractViolation, SamplingError


@dataclass(frozen=True)
class Triplet:
    anchor_idx: int
    positive_idx: int
    negative_idx: int


@dataclass(frozen=True)
class Margin:
    alpha: float = 0.2

    def __post_init__(self):
        if self.alpha < 0:
            raise ContractViolation(f"El margen debe ser ≥ 0: {self.alpha}")


def group_by_class(labels: Sequence[int]) -> Dict[int, np.ndarray]:
    labels = np.asarray(labels, dtype=np.int64)
    return {int(c): np.flatnonzero(labels == c) for c in np.unique(labels)}


def sample_triplets(labels: Sequence[int], count: int, rng: np.random.Generator) -> List[Triplet]:
    """
    `count` tripletas: clase ancla uniforme, luego ancla/positivo uniformes
    dentro de la clase y negativo uniforme entre las muestras de otras clases

    Raises:
        SamplingError: menos de 2 clases, o clase ancla con < 2 muestras
    """
    if count < 1:
        raise SamplingError(f"count debe ser positivo: {count}")
    by_class = group_by_class(labels)
    classes = sorted(by_class)
    if len(classes) < 2:
        raise SamplingError(f"Se necesitan al menos 2 clases, hay {len(classes)}")

    labels_arr = np.asarray(labels, dtype=np.int64)
    negatives_by_class = {c: np.flatnonzero(labels_arr != c) for c in classes}
    triplets: List[Triplet] = []
    for _ in range(count):
        anchor_class = classes[int(rng.integers(len(classes)))]
        members = by_class[anchor_class]
        if members.size < 2:
            raise SamplingError(f"La clase {anchor_class} tiene {members.size} muestra(s); el ancla necesita ≥ 2")
        a, p = rng.choice(members, size=2, replace=False)
        negatives = negatives_by_class[anchor_class]
        n = negatives[int(rng.integers(negatives.size))]
        triplets.append(Triplet(int(a), int(p), int(n)))
    return triplets
