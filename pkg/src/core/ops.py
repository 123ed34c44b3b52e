"""
Operaciones diferenciables sobre Tensor

Sin broadcasting salvo la suma de bias (linear / conv2d).
Subgradiente de relu en 0 = 0; maxpool enruta el gradiente al primer
máximo de cada ventana (índice lineal más bajo).
"""
from typing import Optional, Sequence

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import DimensionError, LabelError
from .tensor import Tensor, record


def _same_shape(op: str, a: Tensor, b: Tensor) -> None:
    if a.shape != b.shape:
        raise DimensionError(f"{op}: formas distintas {a.shape} vs {b.shape}")


# ============================================================================
# Elementales
# ============================================================================

def add(a: Tensor, b: Tensor) -> Tensor:
    _same_shape("add", a, b)
    return record("add", a.data + b.data, (a, b), lambda g: (g, g))


def sub(a: Tensor, b: Tensor) -> Tensor:
    _same_shape("sub", a, b)
    return record("sub", a.data - b.data, (a, b), lambda g: (g, -g))


def mul(a: Tensor, b: Tensor) -> Tensor:
    _same_shape("mul", a, b)
    x, y = a.data, b.data
    return record("mul", x * y, (a, b), lambda g: (g * y, g * x))


def scale(a: Tensor, factor: float) -> Tensor:
    factor = float(factor)
    return record("scale", a.data * factor, (a,), lambda g: (g * factor,))


def add_scalar(a: Tensor, value: float) -> Tensor:
    return record("add_scalar", a.data + float(value), (a,), lambda g: (g,))


def relu(x: Tensor) -> Tensor:
    mask = x.data > 0
    return record("relu", np.where(mask, x.data, 0.0), (x,), lambda g: (g * mask,))


def sum(x: Tensor) -> Tensor:  # noqa: A001
    shape = x.shape
    return record("sum", np.sum(x.data), (x,), lambda g: (np.full(shape, np.asarray(g).item()),))


def mean(x: Tensor) -> Tensor:
    shape, n = x.shape, x.size
    return record("mean", np.mean(x.data), (x,), lambda g: (np.full(shape, np.asarray(g).item() / n),))


def reshape(x: Tensor, shape: Sequence[int]) -> Tensor:
    original = x.shape
    try:
        out = x.data.reshape(tuple(shape))
    except ValueError as e:
        raise DimensionError(f"reshape {original} -> {tuple(shape)}: {e}") from e
    return record("reshape", out, (x,), lambda g: (g.reshape(original),))


def flatten(x: Tensor) -> Tensor:
    return reshape(x, (x.shape[0], -1))


def take_rows(x: Tensor, indices: Sequence[int]) -> Tensor:
    idx = np.asarray(indices, dtype=np.int64)
    n = x.shape[0]
    if idx.size and (idx.min() < 0 or idx.max() >= n):
        raise IndexError(f"take_rows: índice fuera de rango para {n} filas")
    shape = x.shape

    def _backward(g):
        gx = np.zeros(shape)
        np.add.at(gx, idx, g)
        return (gx,)

    return record("take_rows", x.data[idx], (x,), _backward)


# ============================================================================
# Capas
# ============================================================================

def linear(x: Tensor, weight: Tensor, bias: Tensor) -> Tensor:
    """x·wᵀ + b; acepta x de forma [Din] o [N, Din]"""
    if weight.data.ndim != 2 or bias.shape != (weight.shape[0],):
        raise DimensionError(f"linear: weight {weight.shape} / bias {bias.shape}")
    if x.shape[-1] != weight.shape[1] or x.data.ndim not in (1, 2):
        raise DimensionError(f"linear: entrada {x.shape} incompatible con weight {weight.shape}")

    squeeze = x.data.ndim == 1
    xs = x.data[None, :] if squeeze else x.data
    w = weight.data
    out = xs @ w.T + bias.data

    def _backward(g):
        g2 = g[None, :] if squeeze else g
        gx = g2 @ w
        return (gx[0] if squeeze else gx, g2.T @ xs, g2.sum(axis=0))

    return record("linear", out[0] if squeeze else out, (x, weight, bias), _backward)


def conv2d(
    x: Tensor,
    kernel: Tensor,
    stride: int = 1,
    padding: int = 0,
    bias: Optional[Tensor] = None,
) -> Tensor:
    """Correlación cruzada 2D; entrada [N,C,H,W], kernel [F,C,kh,kw]"""
    if x.data.ndim != 4 or kernel.data.ndim != 4:
        raise DimensionError(f"conv2d: se esperan tensores 4D, {x.shape} / {kernel.shape}")
    n, c, h, w = x.shape
    f, ck, kh, kw = kernel.shape
    if c != ck:
        raise DimensionError(f"conv2d: canales de entrada {c} != canales del kernel {ck}")
    if stride < 1 or padding < 0:
        raise DimensionError(f"conv2d: stride={stride} padding={padding}")
    hp, wp = h + 2 * padding, w + 2 * padding
    if kh > hp or kw > wp:
        raise DimensionError(f"conv2d: kernel {kh}x{kw} mayor que la entrada {hp}x{wp}")
    if bias is not None and bias.shape != (f,):
        raise DimensionError(f"conv2d: bias {bias.shape} != ({f},)")

    xp = np.pad(x.data, ((0, 0), (0, 0), (padding, padding), (padding, padding))) if padding else x.data
    windows = sliding_window_view(xp, (kh, kw), axis=(2, 3))[:, :, ::stride, ::stride]
    oh, ow = windows.shape[2], windows.shape[3]
    k = kernel.data

    out = np.tensordot(windows, k, axes=([1, 4, 5], [1, 2, 3])).transpose(0, 3, 1, 2)
    if bias is not None:
        out = out + bias.data[None, :, None, None]

    def _backward(g):
        gk = np.tensordot(g, windows, axes=([0, 2, 3], [0, 2, 3]))
        gcols = np.tensordot(g, k, axes=([1], [0]))  # N, oh, ow, C, kh, kw
        gxp = np.zeros((n, c, hp, wp))
        for i in range(kh):
            for j in range(kw):
                gxp[:, :, i:i + stride * (oh - 1) + 1:stride, j:j + stride * (ow - 1) + 1:stride] += (
                    gcols[:, :, :, :, i, j].transpose(0, 3, 1, 2)
                )
        gx = gxp[:, :, padding:padding + h, padding:padding + w]
        if bias is None:
            return (gx, gk)
        return (gx, gk, g.sum(axis=(0, 2, 3)))

    inputs = (x, kernel) if bias is None else (x, kernel, bias)
    return record("conv2d", out, inputs, _backward)


def maxpool2d(x: Tensor, window: int, stride: int) -> Tensor:
    if x.data.ndim != 4:
        raise DimensionError(f"maxpool2d: se espera tensor 4D, {x.shape}")
    n, c, h, w = x.shape
    if window < 1 or stride < 1 or window > h or window > w:
        raise DimensionError(f"maxpool2d: ventana {window} sobre entrada {h}x{w}")

    win = sliding_window_view(x.data, (window, window), axis=(2, 3))[:, :, ::stride, ::stride]
    oh, ow = win.shape[2], win.shape[3]
    flat = win.reshape(n, c, oh, ow, window * window)
    arg = flat.argmax(axis=-1)
    out = np.take_along_axis(flat, arg[..., None], axis=-1)[..., 0]

    def _backward(g):
        rows = (np.arange(oh) * stride)[None, None, :, None] + arg // window
        cols = (np.arange(ow) * stride)[None, None, None, :] + arg % window
        gx = np.zeros((n, c, h, w))
        np.add.at(gx, (np.arange(n)[:, None, None, None], np.arange(c)[None, :, None, None], rows, cols), g)
        return (gx,)

    return record("maxpool2d", out, (x,), _backward)


def global_avg_pool(x: Tensor) -> Tensor:
    if x.data.ndim != 4:
        raise DimensionError(f"global_avg_pool: se espera tensor 4D, {x.shape}")
    shape = x.shape
    area = shape[2] * shape[3]
    return record(
        "global_avg_pool",
        x.data.mean(axis=(2, 3)),
        (x,),
        lambda g: (np.broadcast_to(g[:, :, None, None] / area, shape).copy(),),
    )


def l2_normalize_rows(x: Tensor, eps: float = 1e-12) -> Tensor:
    if x.data.ndim != 2:
        raise DimensionError(f"l2_normalize_rows: se espera tensor 2D, {x.shape}")
    norms = np.sqrt(np.sum(x.data * x.data, axis=1, keepdims=True) + eps)
    y = x.data / norms

    def _backward(g):
        return ((g - y * np.sum(g * y, axis=1, keepdims=True)) / norms,)

    return record("l2_normalize_rows", y, (x,), _backward)


# ============================================================================
# Distancias y pérdidas
# ============================================================================

def squared_l2_distance(a: Tensor, b: Tensor) -> Tensor:
    """Σ(aᵢ−bᵢ)²"""
    _same_shape("squared_l2_distance", a, b)
    diff = a.data - b.data
    return record(
        "squared_l2_distance",
        np.sum(diff * diff),
        (a, b),
        lambda g: (2.0 * g * diff, -2.0 * g * diff),
    )


def rowwise_squared_distance(a: Tensor, b: Tensor) -> Tensor:
    """Distancia euclídea al cuadrado fila a fila: [T,D] x [T,D] -> [T]"""
    _same_shape("rowwise_squared_distance", a, b)
    if a.data.ndim != 2:
        raise DimensionError(f"rowwise_squared_distance: se espera tensor 2D, {a.shape}")
    diff = a.data - b.data
    return record(
        "rowwise_squared_distance",
        np.sum(diff * diff, axis=1),
        (a, b),
        lambda g: (2.0 * g[:, None] * diff, -2.0 * g[:, None] * diff),
    )


def softmax_cross_entropy(logits: Tensor, labels: Sequence[int]) -> Tensor:
    """Media de -log softmax(logits)[label]"""
    if logits.data.ndim != 2:
        raise DimensionError(f"softmax_cross_entropy: se espera tensor 2D, {logits.shape}")
    n, c = logits.shape
    y = np.asarray(labels, dtype=np.int64)
    if y.shape != (n,):
        raise DimensionError(f"softmax_cross_entropy: {y.shape[0] if y.ndim else 0} etiquetas para {n} filas")
    if y.min() < 0 or y.max() >= c:
        raise LabelError(f"softmax_cross_entropy: etiquetas fuera de 0..{c - 1}")

    z = logits.data
    shifted = z - z.max(axis=1, keepdims=True)
    log_norm = np.log(np.exp(shifted).sum(axis=1))
    rows = np.arange(n)
    loss = np.mean(log_norm - shifted[rows, y])

    def _backward(g):
        probs = np.exp(shifted - log_norm[:, None])
        probs[rows, y] -= 1.0
        return (probs * (np.asarray(g).item() / n),)

    return record("softmax_cross_entropy", loss, (logits,), _backward)
