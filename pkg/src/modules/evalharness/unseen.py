"""
Protocolo de clase no vista

La red se entrena sin la clase `unseen_class`; en test esa clase solo
aporta sus k exemplares al support set y sus consultas.
"""
from typing import Optional, Sequence

import numpy as np
from loguru import logger

from core.errors import ProtocolError
from modules.datagen.dataset import Dataset
from modules.net import Checkpoint, embed_all

from .sweep import EvalReport, k_sweep


def unseen_class_report(
    embeddings: np.ndarray,
    labels: Sequence[int],
    k: int,
    rng_seed: int,
    repeats: int = 5,
    unseen_class: int = 4,
    train_classes: Optional[Sequence[int]] = None,
    aggregate: str = "min",
) -> EvalReport:
    """
    Evalúa k-shot sobre todas las clases y marca la no vista

    Raises:
        ProtocolError: la clase no vista estaba en entrenamiento o falta en el pool de test
    """
    labels = np.asarray(labels, dtype=np.int64)
    if train_classes is not None and unseen_class in {int(c) for c in train_classes}:
        raise ProtocolError(f"La clase {unseen_class} aparece en las clases de entrenamiento {sorted(train_classes)}")
    classes = sorted(int(c) for c in np.unique(labels))
    if unseen_class not in classes:
        raise ProtocolError(f"La clase no vista {unseen_class} no está en el pool de test {classes}")

    held_in = [c for c in classes if c != unseen_class]
    report = k_sweep(
        embeddings, labels, [k], repeats, rng_seed,
        aggregate=aggregate, held_in=held_in, unseen_class=unseen_class,
    )[0]
    recall = report.stat("recall", str(unseen_class))
    logger.info(f"🔍 Clase no vista {unseen_class}: recall {recall.mean:.3f} ± {recall.std:.3f} con k={k}")
    return report


def unseen_class_eval(
    checkpoint: Checkpoint,
    dataset: Dataset,
    k: int,
    rng_seed: int,
    repeats: int = 5,
    unseen_class: int = 4,
    aggregate: str = "min",
) -> EvalReport:
    """Embebe el split de test con el checkpoint y aplica el protocolo"""
    train_classes = checkpoint.train_classes
    if train_classes is not None and unseen_class in train_classes:
        raise ProtocolError(f"El checkpoint se entrenó con la clase {unseen_class}")
    test = dataset.subset(split="test")
    embeddings = embed_all(checkpoint.to_net(), test.images)
    return unseen_class_report(
        embeddings, test.labels, k, rng_seed, repeats, unseen_class, train_classes, aggregate,
    )
