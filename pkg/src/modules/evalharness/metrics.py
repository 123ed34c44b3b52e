"""
Métricas one-vs-rest por clase y promedios macro

precision = TP/(TP+FP), recall = TP/(TP+FN), F1 = media armónica,
accuracy one-vs-rest por clase = (TP+TN)/total (ovr_accuracy). Un
denominador vacío da 0 y queda marcado. Las clases que ni aparecen ni se
predicen no entran en la macro.

"accuracy" a secas es siempre aciertos/consultas: sobre todas las consultas
o sobre las de las clases vistas (held-in). Los TN inflan ovr_accuracy, así
que nunca se usa como accuracy de un conjunto de clases.
"""
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

from core.errors import ContractViolation

from .confusion import ConfusionMatrix

CLASS_METRICS = ("precision", "recall", "f1", "ovr_accuracy")
METRICS = ("precision", "recall", "f1", "accuracy", "ovr_accuracy")


@dataclass(frozen=True)
class ClassMetrics:
    class_id: int
    precision: float
    recall: float
    f1: float
    ovr_accuracy: float
    support: int
    predicted: int
    precision_undefined: bool = False
    recall_undefined: bool = False
    f1_undefined: bool = False

    @property
    def absent(self) -> bool:
        """Ni verdadera ni predicha en ninguna consulta"""
        return self.support == 0 and self.predicted == 0

    def value(self, metric: str) -> float:
        return getattr(self, metric)


@dataclass
class MetricSummary:
    per_class: List[ClassMetrics]
    accuracy: float
    macro: Dict[str, float]
    excluded: List[int] = field(default_factory=list)
    held_in: Optional[Dict[str, float]] = None
    held_in_accuracy: Optional[float] = None

    def for_class(self, class_id: int) -> ClassMetrics:
        for m in self.per_class:
            if m.class_id == class_id:
                return m
        raise KeyError(class_id)


def _ratio(num: int, den: int):
    return (num / den, False) if den > 0 else (0.0, True)


def class_metrics(cm: ConfusionMatrix, index: int, class_id: int) -> ClassMetrics:
    tp, fp, fn, tn = cm.tp(index), cm.fp(index), cm.fn(index), cm.tn(index)
    precision, p_flag = _ratio(tp, tp + fp)
    recall, r_flag = _ratio(tp, tp + fn)
    if precision + recall > 0:
        f1, f_flag = 2 * precision * recall / (precision + recall), False
    else:
        f1, f_flag = 0.0, True
    return ClassMetrics(
        class_id=class_id,
        precision=precision,
        recall=recall,
        f1=f1,
        ovr_accuracy=(tp + tn) / cm.total,
        support=tp + fn,
        predicted=tp + fp,
        precision_undefined=p_flag,
        recall_undefined=r_flag,
        f1_undefined=f_flag,
    )


def subset_accuracy(cm: ConfusionMatrix, indices: Sequence[int]) -> float:
    """Aciertos / consultas cuya clase verdadera está en `indices`; 0 si no hay ninguna"""
    rows = cm.counts[list(indices)]
    total = int(rows.sum())
    if total == 0:
        return 0.0
    return int(sum(cm.counts[i, i] for i in indices)) / total


def macro_average(per_class: Sequence[ClassMetrics]) -> Dict[str, float]:
    # Suma secuencial: reproducible bit a bit con un bucle de referencia
    included = [m for m in per_class if not m.absent]
    if not included:
        return {metric: 0.0 for metric in CLASS_METRICS}
    return {metric: sum(m.value(metric) for m in included) / len(included) for metric in CLASS_METRICS}


def metrics(
    cm: ConfusionMatrix,
    class_ids: Optional[Sequence[int]] = None,
    held_in: Optional[Sequence[int]] = None,
) -> MetricSummary:
    """
    Args:
        cm: matriz de confusión sobre índices 0..C-1
        class_ids: id real de cada índice (por defecto 0..C-1)
        held_in: subconjunto de ids (clases vistas en entrenamiento) con su propia macro
            y su accuracy de aciertos/consultas

    Raises:
        ContractViolation: matriz vacía
    """
    if cm.total <= 0:
        raise ContractViolation("metrics: la matriz de confusión está vacía")
    class_ids = list(range(cm.num_classes)) if class_ids is None else [int(c) for c in class_ids]
    if len(class_ids) != cm.num_classes:
        raise ContractViolation(f"metrics: {len(class_ids)} ids para {cm.num_classes} clases")

    per_class = [class_metrics(cm, i, c) for i, c in enumerate(class_ids)]
    summary = MetricSummary(
        per_class=per_class,
        accuracy=int(cm.counts.trace()) / cm.total,
        macro=macro_average(per_class),
        excluded=[m.class_id for m in per_class if m.absent],
    )
    if held_in is not None:
        keep = set(int(c) for c in held_in)
        summary.held_in = macro_average([m for m in per_class if m.class_id in keep])
        summary.held_in_accuracy = subset_accuracy(cm, [i for i, c in enumerate(class_ids) if c in keep])
    return summary
