"""
Bucle de entrenamiento: red siamesa con tripletas y clasificador baseline
"""
import math
import time
from concurrent.futures import ThreadPoolExecutor
from typing import Dict, List, Sequence, Tuple

import numpy as np
from loguru import logger

from core import ops
from core.errors import ConfigError, DimensionError
from core.rng import stream
from core.tensor import ComputeGraph, Tensor, backward, grad_of, no_grad
from modules.datagen.dataset import Dataset
from modules.net import Checkpoint, EmbeddingNet, build, embed_all, validate_batch
from modules.triplet import Margin, Triplet, batch_triplet_loss, sample_triplets, select_semi_hard

from .augment import augment
from .config import TrainConfig, TrainLog, TrainMode
from .optimizer import SGDMomentum


def _check_inputs(images: np.ndarray) -> None:
    if images.shape[0] == 0:
        raise ConfigError("El split de entrenamiento está vacío")
    try:
        validate_batch(images[:1])
    except DimensionError as e:
        raise ConfigError(f"Imágenes de entrenamiento no válidas: {e}") from e


def _check_triplet_labels(labels: np.ndarray) -> None:
    classes, counts = np.unique(labels, return_counts=True)
    if classes.size < 2:
        raise ConfigError(f"El entrenamiento con tripletas necesita al menos 2 clases, hay {classes.size}")
    small = [int(c) for c, n in zip(classes, counts) if n < 2]
    if small:
        raise ConfigError(f"Clases con menos de 2 muestras de entrenamiento: {small}")


def _check_classifier_labels(labels: np.ndarray) -> int:
    classes = np.unique(labels)
    if classes.size < 2 or not np.array_equal(classes, np.arange(classes.size)):
        raise ConfigError(f"El clasificador necesita etiquetas contiguas 0..C-1, recibidas {classes.tolist()}")
    return int(classes.size)


def _augmented(images: np.ndarray, indices: Sequence[int], config: TrainConfig, rng: np.random.Generator) -> np.ndarray:
    if not config.augment:
        return images[np.asarray(indices)]
    return np.stack([augment(images[i], rng, config.rotation) for i in indices])


def _metadata(config: TrainConfig, log: TrainLog, images: np.ndarray, labels: np.ndarray) -> Dict:
    return {
        "mode": config.mode.value,
        "epochs": config.epochs,
        "final_loss": log.losses[-1] if log.epochs else None,
        "rng_seed": config.rng_seed,
        "embedding_dim": config.embedding_dim,
        "input_size": int(images.shape[-1]),
        "learning_rate": config.learning_rate,
        "momentum": config.momentum,
        "margin": config.margin,
        "batch_size": config.batch_size,
        "mining": config.mining,
        "normalize": config.normalize,
        "train_classes": sorted(int(c) for c in np.unique(labels)),
    }


def _shard_gradients(
    net: EmbeddingNet,
    batch: np.ndarray,
    triplets: List[Triplet],
    margin: Margin,
    weight: float,
) -> Tuple[float, List[np.ndarray]]:
    """Pérdida y gradientes de un shard en su propio grafo"""
    used = sorted({i for t in triplets for i in (t.anchor_idx, t.positive_idx, t.negative_idx)})
    local = {g: i for i, g in enumerate(used)}
    shard = [Triplet(local[t.anchor_idx], local[t.positive_idx], local[t.negative_idx]) for t in triplets]
    params = list(net.params.values())
    with ComputeGraph():
        loss = batch_triplet_loss(net.forward(Tensor(batch[used])), shard, margin, weight=weight)
        return loss.item(), grad_of(loss, params)


def _triplet_step(
    net: EmbeddingNet,
    optimizer: SGDMomentum,
    images: np.ndarray,
    labels: np.ndarray,
    triplets: List[Triplet],
    config: TrainConfig,
    margin: Margin,
    augment_rng: np.random.Generator,
    mining_rng: np.random.Generator,
    pool: ThreadPoolExecutor = None,
) -> float:
    # Cada imagen distinta se embebe una sola vez por lote
    unique = sorted({i for t in triplets for i in (t.anchor_idx, t.positive_idx, t.negative_idx)})
    local = {g: i for i, g in enumerate(unique)}
    batch = _augmented(images, unique, config, augment_rng)
    triplets = [Triplet(local[t.anchor_idx], local[t.positive_idx], local[t.negative_idx]) for t in triplets]

    if config.mining == "semi-hard":
        triplets = select_semi_hard(embed_all(net, batch), labels[unique], triplets, margin, mining_rng)

    if pool is None:
        with ComputeGraph():
            loss = batch_triplet_loss(net.forward(Tensor(batch)), triplets, margin)
            backward(loss)
            value = loss.item()
        optimizer.step()
        optimizer.zero_grad()
        return value

    shards = [s for s in np.array_split(np.arange(len(triplets)), config.workers) if s.size]
    futures = [
        pool.submit(_shard_gradients, net, batch, [triplets[i] for i in s], margin, s.size / len(triplets))
        for s in shards
    ]
    # Suma en orden de shard: mismo resultado con cualquier planificación de hilos
    results = [f.result() for f in futures]
    grads = [np.sum([g[j] for _, g in results], axis=0) for j in range(len(optimizer.params))]
    optimizer.step(grads)
    return float(sum(v for v, _ in results))


def train(dataset: Dataset, config: TrainConfig) -> Tuple[Checkpoint, TrainLog]:
    """
    Entrena la red sobre el split de entrenamiento

    Cada época son ⌈N / batch_size⌉ lotes de batch_size tripletas aleatorias.

    Raises:
        ConfigError: configuración o datos inválidos (antes de cualquier paso)
    """
    if config.mode == TrainMode.CLASSIFIER:
        return train_classifier(dataset, config)

    data = dataset.subset(split="train")
    images, labels = data.images, data.labels
    _check_inputs(images)
    _check_triplet_labels(labels)
    margin = Margin(config.margin)

    net = build(config.preset, config.rng_seed, config.embedding_dim, config.normalize)
    optimizer = SGDMomentum(list(net.params.values()), config.learning_rate, config.momentum)
    sampling_rng = stream(config.rng_seed, "sampling")
    augment_rng = stream(config.rng_seed, "augment")
    mining_rng = stream(config.rng_seed, "mining")
    n_batches = math.ceil(len(labels) / config.batch_size)

    logger.info(
        f"🚀 Entrenando {config.preset} con tripletas: {len(labels)} imágenes, "
        f"{config.epochs} épocas x {n_batches} lotes, lr={config.learning_rate}, m={config.momentum}"
    )
    log = TrainLog()
    pool = ThreadPoolExecutor(max_workers=config.workers) if config.workers > 1 else None
    try:
        for epoch in range(1, config.epochs + 1):
            start = time.perf_counter()
            losses = [
                _triplet_step(
                    net, optimizer, images, labels,
                    sample_triplets(labels, config.batch_size, sampling_rng),
                    config, margin, augment_rng, mining_rng, pool,
                )
                for _ in range(n_batches)
            ]
            seconds = time.perf_counter() - start
            log.append(epoch, float(np.mean(losses)), seconds)
            logger.info(f"📉 Época {epoch}/{config.epochs}: loss={log.losses[-1]:.6f} ({seconds:.1f}s)")
    finally:
        if pool is not None:
            pool.shutdown()

    logger.success(f"✅ Entrenamiento completado, loss final {log.losses[-1]:.6f}")
    return Checkpoint.from_net(net, _metadata(config, log, images, labels)), log


def train_classifier(dataset: Dataset, config: TrainConfig) -> Tuple[Checkpoint, TrainLog]:
    """Baseline: mismo backbone + cabeza lineal de C clases con entropía cruzada"""
    data = dataset.subset(split="train")
    images, labels = data.images, data.labels
    _check_inputs(images)
    num_classes = _check_classifier_labels(labels)

    net = build(config.preset, config.rng_seed, config.embedding_dim, config.normalize)
    net.attach_head(num_classes)
    optimizer = SGDMomentum(list(net.params.values()), config.learning_rate, config.momentum)
    sampling_rng = stream(config.rng_seed, "sampling")
    augment_rng = stream(config.rng_seed, "augment")

    logger.info(f"🚀 Entrenando clasificador {config.preset} con {num_classes} clases, {len(labels)} imágenes")
    log = TrainLog()
    for epoch in range(1, config.epochs + 1):
        start = time.perf_counter()
        order = sampling_rng.permutation(len(labels))
        losses, correct = [], 0
        for b in range(0, len(order), config.batch_size):
            idx = order[b:b + config.batch_size]
            with ComputeGraph():
                logits = net.logits(Tensor(_augmented(images, idx, config, augment_rng)))
                loss = ops.softmax_cross_entropy(logits, labels[idx])
                backward(loss)
                losses.append(loss.item())
                correct += int(np.sum(np.argmax(logits.data, axis=1) == labels[idx]))
            optimizer.step()
            optimizer.zero_grad()
        seconds = time.perf_counter() - start
        log.append(epoch, float(np.mean(losses)), seconds)
        logger.info(
            f"📉 Época {epoch}/{config.epochs}: loss={log.losses[-1]:.6f}, "
            f"acc={correct / len(labels):.3f} ({seconds:.1f}s)"
        )

    metadata = _metadata(config, log, images, labels)
    metadata["num_classes"] = num_classes
    logger.success(f"✅ Clasificador entrenado, loss final {log.losses[-1]:.6f}")
    return Checkpoint.from_net(net, metadata), log


def predict_classes(net: EmbeddingNet, images: np.ndarray) -> np.ndarray:
    """argmax de los logits, imagen a imagen"""
    validate_batch(np.asarray(images))
    with no_grad():
        return np.array([int(np.argmax(net.logits(Tensor(images[i:i + 1])).data[0])) for i in range(len(images))],
                        dtype=np.int64)
