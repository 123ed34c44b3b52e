"""
Pérdida triplet: max(0, ‖a−p‖² − ‖a−n‖² + α)
"""
from typing import Sequence, Union

import numpy as np

from core import ops
from core.errors import DimensionError
from core.tensor import Tensor

from .sampling import Margin, Triplet

MarginLike = Union[Margin, float]


def _alpha(margin: MarginLike) -> float:
    return margin.alpha if isinstance(margin, Margin) else Margin(float(margin)).alpha


def triplet_loss(ea: Tensor, ep: Tensor, en: Tensor, margin: MarginLike) -> Tensor:
    if not (ea.shape == ep.shape == en.shape):
        raise DimensionError(f"triplet_loss: formas {ea.shape}, {ep.shape}, {en.shape}")
    gap = ops.sub(ops.squared_l2_distance(ea, ep), ops.squared_l2_distance(ea, en))
    return ops.relu(ops.add_scalar(gap, _alpha(margin)))


def triplet_index_arrays(triplets: Sequence[Triplet]):
    a = np.fromiter((t.anchor_idx for t in triplets), dtype=np.int64, count=len(triplets))
    p = np.fromiter((t.positive_idx for t in triplets), dtype=np.int64, count=len(triplets))
    n = np.fromiter((t.negative_idx for t in triplets), dtype=np.int64, count=len(triplets))
    return a, p, n


def batch_triplet_loss(embeddings: Tensor, triplets: Sequence[Triplet], margin: MarginLike, weight: float = 1.0) -> Tensor:
    """
    Media de las pérdidas por tripleta sobre un lote de embeddings [N,D]

    `weight` escala la media (shards data-parallel: len(shard)/len(lote)).
    """
    if not triplets:
        raise DimensionError("batch_triplet_loss: lista de tripletas vacía")
    if embeddings.data.ndim != 2:
        raise DimensionError(f"batch_triplet_loss: se esperan embeddings [N,D], {embeddings.shape}")
    a, p, n = triplet_index_arrays(triplets)
    rows = embeddings.shape[0]
    for idx in (a, p, n):
        if idx.min() < 0 or idx.max() >= rows:
            raise IndexError(f"Índice de tripleta fuera de rango para {rows} embeddings")

    d_ap = ops.rowwise_squared_distance(ops.take_rows(embeddings, a), ops.take_rows(embeddings, p))
    d_an = ops.rowwise_squared_distance(ops.take_rows(embeddings, a), ops.take_rows(embeddings, n))
    hinge = ops.relu(ops.add_scalar(ops.sub(d_ap, d_an), _alpha(margin)))
    loss = ops.mean(hinge)
    return ops.scale(loss, weight) if weight != 1.0 else loss


def triplet_losses(embeddings: np.ndarray, triplets: Sequence[Triplet], margin: MarginLike) -> np.ndarray:
    """Pérdidas individuales sin grafo (diagnóstico y minería)"""
    a, p, n = triplet_index_arrays(triplets)
    e = np.asarray(embeddings, dtype=np.float64)
    d_ap = np.sum((e[a] - e[p]) ** 2, axis=1)
    d_an = np.sum((e[a] - e[n]) ** 2, axis=1)
    return np.maximum(0.0, d_ap - d_an + _alpha(margin))
