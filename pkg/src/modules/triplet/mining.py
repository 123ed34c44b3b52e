"""
Minería semi-hard de negativos dentro de un lote
"""
from typing import List, Sequence

import numpy as np

from .loss import MarginLike, _alpha
from .sampling import Triplet


def select_semi_hard(
    embeddings: np.ndarray,
    labels: Sequence[int],
    triplets: Sequence[Triplet],
    margin: MarginLike,
    rng: np.random.Generator,
) -> List[Triplet]:
    """
    Sustituye cada negativo por uno semi-hard del lote:
    d(a,p) < d(a,n) < d(a,p) + α. Si no existe, se conserva el original.
    """
    e = np.asarray(embeddings, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    alpha = _alpha(margin)
    mined: List[Triplet] = []
    for t in triplets:
        d_ap = np.sum((e[t.anchor_idx] - e[t.positive_idx]) ** 2)
        d_an = np.sum((e - e[t.anchor_idx]) ** 2, axis=1)
        ok = (labels != labels[t.anchor_idx]) & (d_an > d_ap) & (d_an < d_ap + alpha)
        candidates = np.flatnonzero(ok)
        if candidates.size:
            negative = int(candidates[int(rng.integers(candidates.size))])
            mined.append(Triplet(t.anchor_idx, t.positive_idx, negative))
        else:
            mined.append(t)
    return mined
