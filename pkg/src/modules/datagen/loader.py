"""
Carga de un dataset desde su manifest
"""
from pathlib import Path
from typing import Union

import numpy as np
from loguru import logger

from core.errors import DatasetLoadError

from .dataset import SPLITS, Dataset
from .image_io import read_png
from .manifest import ManifestRecord, manifest_path, read_info, read_manifest


def load_dataset(path: Union[str, Path]) -> Dataset:
    """
    Lee el manifest y todas las imágenes que referencia, en el orden del manifest

    Raises:
        DatasetLoadError: fichero ausente, PNG ilegible, forma inesperada, split desconocido
            o label/seed no enteros
    """
    csv_path = manifest_path(path)
    root = csv_path.parent
    frame = read_manifest(csv_path)
    info = read_info(root)

    images, labels, splits, ids = [], [], [], []
    expected = None if info is None else (3, info.image_size, info.image_size)
    for row in frame.itertuples(index=False):
        try:
            record = ManifestRecord(str(row.path), int(row.label), str(row.split), int(row.seed))
        except (TypeError, ValueError) as e:
            raise DatasetLoadError(f"{csv_path}: fila {row.path} con label/seed no enteros: {e}") from e
        if record.split not in SPLITS:
            raise DatasetLoadError(f"{record.path}: split desconocido '{record.split}'")
        image = read_png(root / record.path)
        if expected is None:
            expected = image.shape
        if image.shape != expected:
            raise DatasetLoadError(f"{record.path}: forma {image.shape}, se esperaba {expected}")
        images.append(image)
        labels.append(record.label)
        splits.append(record.split)
        ids.append(record.frame_id)

    if not images:
        raise DatasetLoadError(f"{csv_path}: manifest vacío")
    logger.info(f"📂 Cargados {len(images)} fotogramas desde {csv_path}")
    return Dataset(np.stack(images), np.asarray(labels), np.asarray(splits, dtype=object), ids, root)
