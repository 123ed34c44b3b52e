"""
SGD con momentum (heavy-ball): v ← m·v + g ; p ← p − lr·v
"""
from typing import List, Sequence, Tuple

import numpy as np

from core.errors import DimensionError
from core.tensor import Tensor


def sgd_momentum_step(
    params: Sequence[np.ndarray],
    grads: Sequence[np.ndarray],
    velocity: Sequence[np.ndarray],
    lr: float,
    momentum: float,
) -> Tuple[List[np.ndarray], List[np.ndarray]]:
    """Un paso de SGD+momentum; devuelve (parámetros, velocidades) nuevos"""
    if not (len(params) == len(grads) == len(velocity)):
        raise DimensionError(f"sgd_momentum_step: {len(params)} params, {len(grads)} grads, {len(velocity)} velocidades")
    new_params, new_velocity = [], []
    for p, g, v in zip(params, grads, velocity):
        p, g, v = np.asarray(p, dtype=np.float64), np.asarray(g, dtype=np.float64), np.asarray(v, dtype=np.float64)
        if not (p.shape == g.shape == v.shape):
            raise DimensionError(f"sgd_momentum_step: formas {p.shape}, {g.shape}, {v.shape}")
        v_next = momentum * v + g
        new_velocity.append(v_next)
        new_params.append(p - lr * v_next)
    return new_params, new_velocity


class SGDMomentum:
    """Optimizador sobre tensores hoja; actualiza los datos in-place"""

    def __init__(self, params: Sequence[Tensor], lr: float = 0.001, momentum: float = 0.9):
        self.params = list(params)
        self.lr = lr
        self.momentum = momentum
        self.velocity = [np.zeros_like(p.data) for p in self.params]

    def step(self, grads: Sequence[np.ndarray] = None) -> None:
        if grads is None:
            grads = [p.grad if p.grad is not None else np.zeros_like(p.data) for p in self.params]
        new_params, self.velocity = sgd_momentum_step(
            [p.data for p in self.params], grads, self.velocity, self.lr, self.momentum
        )
        for tensor, values in zip(self.params, new_params):
            tensor.assign_(values)

    def zero_grad(self) -> None:
        for p in self.params:
            p.zero_grad()
