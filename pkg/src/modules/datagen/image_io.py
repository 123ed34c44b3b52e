"""
PNG RGB de 8 bits <-> arrays [3,S,S] float en [0,1]
"""
from pathlib import Path
from typing import Union

import numpy as np
from PIL import Image

from core.errors import DatasetIOError, DatasetLoadError


def to_uint8(image: np.ndarray) -> np.ndarray:
    """[3,S,S] en [0,1] -> [S,S,3] uint8"""
    return np.round(np.clip(image, 0.0, 1.0) * 255.0).astype(np.uint8).transpose(1, 2, 0)


def from_uint8(pixels: np.ndarray) -> np.ndarray:
    return np.ascontiguousarray(pixels.transpose(2, 0, 1), dtype=np.float64) / 255.0


def save_png(image: np.ndarray, path: Union[str, Path]) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        Image.fromarray(to_uint8(image)).save(path, format="PNG")
    except OSError as e:
        raise DatasetIOError(f"No se pudo escribir {path}: {e}") from e
    return path


def read_png(path: Union[str, Path]) -> np.ndarray:
    path = Path(path)
    try:
        with Image.open(path) as img:
            pixels = np.asarray(img.convert("RGB"), dtype=np.uint8)
    except FileNotFoundError as e:
        raise DatasetLoadError(f"No existe el fichero {path}") from e
    except OSError as e:
        raise DatasetLoadError(f"PNG ilegible {path}: {e}") from e
    return from_uint8(pixels)
