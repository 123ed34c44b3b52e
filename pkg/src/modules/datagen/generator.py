"""
Generación procedural de fotogramas tipo endoscopia y del dataset en disco
"""
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Dict, List, Optional, Union

import numpy as np
from loguru import logger
from PIL import Image, ImageDraw

from core.errors import DatasetIOError, DimensionError
from core.rng import derived_seed

from .image_io import from_uint8, save_png, to_uint8
from .manifest import DatasetManifest, ManifestRecord
from .motifs import SynthClassSpec, default_specs

MIN_FRAME_SIZE = 32
_NOISE_GRID = 5


def field_of_view_mask(size: int) -> np.ndarray:
    """True dentro del círculo inscrito"""
    yy, xx = np.mgrid[:size, :size]
    c = (size - 1) / 2
    return (yy - c) ** 2 + (xx - c) ** 2 <= (size / 2) ** 2


def _base_texture(spec: SynthClassSpec, size: int, rng: np.random.Generator):
    lo, hi = (np.asarray(h, dtype=np.float64) for h in spec.hue_range)
    base = rng.uniform(lo, hi)
    noise = rng.normal(0.0, spec.noise_scale, size=(3, _NOISE_GRID, _NOISE_GRID))
    smooth = np.stack([
        np.asarray(Image.fromarray(n.astype(np.float32)).resize((size, size), resample=Image.BILINEAR),
                   dtype=np.float64)
        for n in noise
    ])
    return base, np.clip(base[:, None, None] + smooth, 0.0, 1.0)


def generate_frame(spec: SynthClassSpec, size: int, rng: np.random.Generator) -> np.ndarray:
    """
    Fotograma [3,size,size] en [0,1], cuantizado a 8 bits

    Fondo rosado de baja frecuencia + motivo de la clase + máscara circular
    (fuera del círculo inscrito todo es negro).
    """
    if size < MIN_FRAME_SIZE:
        raise DimensionError(f"Tamaño de fotograma {size} menor que {MIN_FRAME_SIZE}")
    base, texture = _base_texture(spec, size, rng)
    img = Image.fromarray(to_uint8(texture))
    spec.draw(ImageDraw.Draw(img), size, tuple(float(b) for b in base), rng)
    frame = from_uint8(np.asarray(img))
    frame[:, ~field_of_view_mask(size)] = 0.0
    return frame


def split_counts(n_per_class: int, train_fraction: float = 0.7) -> int:
    """Número de registros de entrenamiento por clase"""
    return int(round(train_fraction * n_per_class))


def _frame_path(label: int, index: int) -> str:
    return f"class_{label}/frame_{index:05d}.png"


def generate_dataset(
    out_dir: Union[str, Path],
    n_per_class: int = 200,
    size: int = 64,
    seed: int = 7,
    unseen_protocol: bool = False,
    train_fraction: float = 0.7,
    unseen_class: int = 4,
    specs: Optional[Dict[int, SynthClassSpec]] = None,
    workers: int = 1,
) -> DatasetManifest:
    """
    Escribe n_per_class PNG por clase y el manifest

    Con unseen_protocol la clase `unseen_class` va entera a test.

    Raises:
        DatasetIOError: el directorio de salida no es escribible
    """
    if n_per_class < 1:
        raise DimensionError(f"n_per_class debe ser ≥ 1, recibido {n_per_class}")
    if size < MIN_FRAME_SIZE:
        raise DimensionError(f"Tamaño de fotograma {size} menor que {MIN_FRAME_SIZE}")
    out_dir = Path(out_dir)
    if out_dir.exists() and not out_dir.is_dir():
        raise DatasetIOError(f"{out_dir} existe y no es un directorio")

    specs = specs or default_specs()
    n_train = split_counts(n_per_class, train_fraction)
    records: List[ManifestRecord] = []
    for label in sorted(specs):
        for j in range(n_per_class):
            split = "train" if j < n_train and not (unseen_protocol and label == unseen_class) else "test"
            index = len(records)
            records.append(ManifestRecord(_frame_path(label, j), label, split, derived_seed(seed, "data", index)))

    def render(record: ManifestRecord) -> None:
        frame = generate_frame(specs[record.label], size, np.random.default_rng(record.seed))
        save_png(frame, out_dir / record.path)

    logger.info(f"🎨 Generando {len(records)} fotogramas {size}x{size} en {out_dir}")
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(render, records))
    else:
        for record in records:
            render(record)

    manifest = DatasetManifest(
        records=records,
        seed=seed,
        image_size=size,
        n_per_class=n_per_class,
        unseen_protocol=unseen_protocol,
        unseen_class=unseen_class,
        train_fraction=train_fraction,
    )
    manifest.write(out_dir)
    logger.success(f"✅ Dataset generado: {len(records)} fotogramas, {len(specs)} clases")
    return manifest
