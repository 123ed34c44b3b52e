"""
Barrido de k con redibujado del support set

Cada (k, repetición) usa su propio stream "support" derivado de la semilla
maestra, así la ejecución en paralelo coincide con la secuencial.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from loguru import logger

from core.errors import ConfigError, DimensionError, SupportError
from core.rng import stream
from modules.fewshot import build_support, classify_batch, predicted_labels

from .confusion import confusion
from .metrics import METRICS, MetricSummary, metrics

ALL, MACRO, HELD_IN = "all", "macro", "held-in"


@dataclass(frozen=True)
class MetricStat:
    mean: float
    std: float


def mean_std(values: Sequence[float]) -> MetricStat:
    """Media aritmética y desviación muestral (n-1); 0 si todas las repeticiones coinciden"""
    arr = np.asarray(values, dtype=np.float64)
    if arr.size == 0:
        raise ConfigError("mean_std: sin valores")
    if np.all(arr == arr[0]):
        return MetricStat(float(arr[0]), 0.0)
    return MetricStat(float(arr.mean()), float(arr.std(ddof=1)))


def summary_value(summary: MetricSummary, metric: str, cls: str) -> Optional[float]:
    """Valor de una celda; None si la combinación no existe"""
    if cls == ALL:
        return summary.accuracy if metric == "accuracy" else None
    if cls == MACRO:
        return summary.macro.get(metric)
    if cls == HELD_IN:
        if summary.held_in is None:
            return None
        return summary.held_in_accuracy if metric == "accuracy" else summary.held_in[metric]
    return None if metric == "accuracy" else summary.for_class(int(cls)).value(metric)


@dataclass
class EvalReport:
    k: int
    repeats: int
    runs: List[MetricSummary]
    class_ids: List[int]
    unseen_class: Optional[int] = None
    held_in: Optional[List[int]] = None

    def class_keys(self) -> List[str]:
        keys = [ALL, MACRO]
        if self.held_in is not None:
            keys.append(HELD_IN)
        return keys + [str(c) for c in self.class_ids]

    def values(self, metric: str, cls: str = MACRO) -> List[float]:
        return [summary_value(run, metric, cls) for run in self.runs]

    def stat(self, metric: str, cls: str = MACRO) -> MetricStat:
        if metric not in METRICS:
            raise KeyError(metric)
        if summary_value(self.runs[0], metric, cls) is None:
            raise KeyError(f"{metric}/{cls}")
        return mean_std(self.values(metric, cls))

    def rows(self) -> List[Tuple[int, int, str, str, float]]:
        """(k, repeat, metric, class, value) por repetición"""
        out = []
        for repeat, run in enumerate(self.runs, start=1):
            for cls in self.class_keys():
                for metric in METRICS:
                    value = summary_value(run, metric, cls)
                    if value is not None:
                        out.append((self.k, repeat, metric, cls, value))
        return out

    def summary_rows(self) -> List[Tuple[int, str, str, float, float]]:
        out = []
        for cls in self.class_keys():
            for metric in METRICS:
                if summary_value(self.runs[0], metric, cls) is None:
                    continue
                s = self.stat(metric, cls)
                out.append((self.k, metric, cls, s.mean, s.std))
        return out


def _check_class_sizes(labels: np.ndarray, k_max: int) -> List[int]:
    classes, counts = np.unique(labels, return_counts=True)
    for c, n in zip(classes, counts):
        if n <= k_max:
            raise SupportError(f"La clase {int(c)} tiene {int(n)} muestras, se necesitan más de k={k_max}")
    return [int(c) for c in classes]


def _run_repeat(
    embeddings: np.ndarray,
    labels: np.ndarray,
    classes: List[int],
    k: int,
    repeat: int,
    rng_seed: int,
    aggregate: str,
    held_in: Optional[Sequence[int]],
) -> MetricSummary:
    support, queries = build_support(embeddings, labels, k, stream(rng_seed, "support", k, repeat))
    predictions = predicted_labels(classify_batch(embeddings[queries], support, aggregate))
    index_of: Dict[int, int] = {c: i for i, c in enumerate(classes)}
    cm = confusion(
        [index_of[int(c)] for c in labels[queries]],
        [index_of[int(c)] for c in predictions],
        len(classes),
    )
    return metrics(cm, classes, held_in)


def k_sweep(
    embeddings: np.ndarray,
    labels: Sequence[int],
    ks: Sequence[int],
    repeats: int,
    rng_seed: int,
    aggregate: str = "min",
    held_in: Optional[Sequence[int]] = None,
    unseen_class: Optional[int] = None,
    workers: int = 1,
) -> List[EvalReport]:
    """
    Un EvalReport por k con `repeats` redibujados independientes del support set

    Raises:
        SupportError: alguna clase no tiene más de max(ks) muestras
    """
    embeddings = np.asarray(embeddings, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    if repeats < 1:
        raise ConfigError(f"repeats debe ser ≥ 1, recibido {repeats}")
    if not ks or min(ks) < 1:
        raise ConfigError(f"Valores de k inválidos: {list(ks)}")
    if embeddings.ndim != 2 or embeddings.shape[0] != labels.shape[0]:
        raise DimensionError(f"k_sweep: embeddings {embeddings.shape} y {labels.shape[0]} etiquetas")
    classes = _check_class_sizes(labels, max(ks))

    jobs = [(k, r) for k in ks for r in range(1, repeats + 1)]
    args = (embeddings, labels, classes)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            runs = list(pool.map(lambda kr: _run_repeat(*args, kr[0], kr[1], rng_seed, aggregate, held_in), jobs))
    else:
        runs = [_run_repeat(*args, k, r, rng_seed, aggregate, held_in) for k, r in jobs]

    reports = []
    for i, k in enumerate(ks):
        report = EvalReport(
            k=int(k),
            repeats=repeats,
            runs=runs[i * repeats:(i + 1) * repeats],
            class_ids=classes,
            unseen_class=unseen_class,
            held_in=None if held_in is None else [int(c) for c in held_in],
        )
        acc = report.stat("accuracy", ALL)
        logger.info(f"📊 k={k}: accuracy {acc.mean:.3f} ± {acc.std:.3f} ({repeats} repeticiones)")
        reports.append(report)
    return reports
