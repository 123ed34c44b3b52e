"""
Aumentación: flips horizontal/vertical y rotación

Por defecto la rotación es un múltiplo de 90° (exacta, sin interpolar);
con rotation="arbitrary" el ángulo es uniforme en [0, 360) con
interpolación bilineal y relleno negro.
"""
from dataclasses import dataclass

import numpy as np
from PIL import Image

from core.errors import DimensionError


@dataclass(frozen=True)
class AugmentDraw:
    """Resultado de los sorteos de una imagen"""
    hflip: bool = False
    vflip: bool = False
    quarter_turns: int = 0
    angle: float = 0.0


def draw_augmentation(rng: np.random.Generator, rotation: str = "right-angle") -> AugmentDraw:
    hflip = bool(rng.random() < 0.5)
    vflip = bool(rng.random() < 0.5)
    if rotation == "arbitrary":
        return AugmentDraw(hflip, vflip, 0, float(rng.uniform(0.0, 360.0)))
    return AugmentDraw(hflip, vflip, int(rng.integers(4)), 0.0)


def hflip(image: np.ndarray) -> np.ndarray:
    return image[:, :, ::-1]


def vflip(image: np.ndarray) -> np.ndarray:
    return image[:, ::-1, :]


def rot90(image: np.ndarray, quarter_turns: int) -> np.ndarray:
    """Rotación antihoraria de quarter_turns × 90°"""
    return np.rot90(image, k=quarter_turns % 4, axes=(1, 2))


def rotate_bilinear(image: np.ndarray, angle: float) -> np.ndarray:
    channels = [
        np.asarray(
            Image.fromarray(np.asarray(c, dtype=np.float32)).rotate(
                angle, resample=Image.BILINEAR, fillcolor=0.0
            ),
            dtype=np.float64,
        )
        for c in image
    ]
    return np.stack(channels)


def apply_augmentation(image: np.ndarray, draw: AugmentDraw) -> np.ndarray:
    if image.ndim != 3 or image.shape[1] != image.shape[2]:
        raise DimensionError(f"augment: se espera imagen cuadrada [C,H,W], recibida {image.shape}")
    out = image
    if draw.hflip:
        out = hflip(out)
    if draw.vflip:
        out = vflip(out)
    if draw.quarter_turns:
        out = rot90(out, draw.quarter_turns)
    if draw.angle:
        out = rotate_bilinear(out, draw.angle)
    return np.ascontiguousarray(out, dtype=np.float64)


def augment(image: np.ndarray, rng: np.random.Generator, rotation: str = "right-angle") -> np.ndarray:
    """Aumentación que preserva la etiqueta y la forma"""
    return apply_augmentation(image, draw_augmentation(rng, rotation))
