"""
Preprocesado de fotogramas: recorte central 500x500 y resize bilineal a 224x224
"""
import numpy as np
from PIL import Image

from core.errors import DimensionError

CROP_SIZE = 500
OUTPUT_SIZE = 224


def center_crop(frame: np.ndarray, size: int = CROP_SIZE) -> np.ndarray:
    _, h, w = frame.shape
    if h < size or w < size:
        raise DimensionError(f"preprocess: fotograma {h}x{w} menor que el recorte {size}x{size}")
    top, left = (h - size) // 2, (w - size) // 2
    return frame[:, top:top + size, left:left + size]


def resize_bilinear(image: np.ndarray, size: int) -> np.ndarray:
    channels = [
        np.asarray(
            Image.fromarray(np.asarray(c, dtype=np.float32)).resize((size, size), resample=Image.BILINEAR),
            dtype=np.float64,
        )
        for c in image
    ]
    return np.stack(channels)


def preprocess(frame: np.ndarray, crop: int = CROP_SIZE, size: int = OUTPUT_SIZE) -> np.ndarray:
    """
    [3,H,W] (H,W ≥ 500) -> [3,224,224] con valores en [0,1]

    Si algún valor supera 1 se interpreta como escala 0..255.
    """
    frame = np.asarray(frame, dtype=np.float64)
    if frame.ndim != 3:
        raise DimensionError(f"preprocess: se espera [3,H,W], recibido {frame.shape}")
    out = resize_bilinear(center_crop(frame, crop), size)
    if frame.max() > 1.0:
        out = out / 255.0
    return np.clip(out, 0.0, 1.0)


def preprocess_batch(frames: np.ndarray) -> np.ndarray:
    return np.stack([preprocess(f) for f in frames]) if len(frames) else np.zeros((0, 3, OUTPUT_SIZE, OUTPUT_SIZE))
