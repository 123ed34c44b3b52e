"""
Comprobación de gradientes por diferencias finitas centrales
"""
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence

import numpy as np

from .tensor import ComputeGraph, Tensor, backward, no_grad

ScalarFn = Callable[[Tensor], Tensor]


@dataclass
class GradCheckResult:
    """Resultado de finite_difference_check"""
    max_rel_error: float
    checked: int
    kinks: List[int] = field(default_factory=list)

    def __float__(self) -> float:
        return self.max_rel_error


def relative_error(a: float, b: float) -> float:
    return abs(a - b) / max(abs(a), abs(b), 1e-8)


def _evaluate(f: ScalarFn, x: Tensor) -> float:
    with no_grad():
        return f(x).item()


def finite_difference_check(
    f: ScalarFn,
    x: Tensor,
    eps: float = 1e-5,
    indices: Optional[Sequence[int]] = None,
    kink_tol: float = 1e-3,
) -> GradCheckResult:
    """
    Compara el gradiente autodiff de f en x con (f(x+εeᵢ) − f(x−εeᵢ)) / 2ε

    Las coordenadas donde las diferencias laterales discrepan más de
    kink_tol (relativo) son puntos no diferenciables: se marcan y se excluyen.
    x se restaura exactamente al terminar.
    """
    leaf = Tensor(x.data.copy(), requires_grad=True)
    with ComputeGraph():
        backward(f(leaf))
    analytic = leaf.grad.reshape(-1) if leaf.grad is not None else np.zeros(leaf.size)

    flat = leaf.data.reshape(-1)
    coords = range(flat.size) if indices is None else indices
    f0 = _evaluate(f, leaf)

    worst, checked, kinks = 0.0, 0, []
    for i in coords:
        original = flat[i]
        flat[i] = original + eps
        f_plus = _evaluate(f, leaf)
        flat[i] = original - eps
        f_minus = _evaluate(f, leaf)
        flat[i] = original

        forward_slope = (f_plus - f0) / eps
        backward_slope = (f0 - f_minus) / eps
        scale = max(abs(forward_slope), abs(backward_slope), 1.0)
        if abs(forward_slope - backward_slope) > kink_tol * scale:
            kinks.append(int(i))
            continue

        numeric = (f_plus - f_minus) / (2.0 * eps)
        worst = max(worst, relative_error(float(analytic[i]), numeric))
        checked += 1

    return GradCheckResult(max_rel_error=worst, checked=checked, kinks=kinks)
