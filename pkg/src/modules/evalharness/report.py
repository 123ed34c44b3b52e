"""
Salidas de la evaluación: CSV por repetición, CSV resumen y tablas de texto
"""
from pathlib import Path
from typing import Dict, List, Mapping, Sequence, Tuple, Union

import pandas as pd

from core.errors import DatasetIOError

from .metrics import CLASS_METRICS, METRICS
from .sweep import ALL, HELD_IN, MACRO, EvalReport, summary_value

REPORT_COLUMNS = ["k", "repeat", "metric", "class", "value"]
SUMMARY_COLUMNS = ["k", "metric", "class", "mean", "std"]

_METRIC_NAMES = {
    "precision": "Precision", "recall": "Recall", "f1": "F1-score", "accuracy": "Accuracy",
    "ovr_accuracy": "OvR accuracy",
}
TABLE_METRICS = ("precision", "recall", "f1", "accuracy")


def report_frame(reports: Sequence[EvalReport]) -> pd.DataFrame:
    return pd.DataFrame([row for r in reports for row in r.rows()], columns=REPORT_COLUMNS)


def summary_frame(reports: Sequence[EvalReport]) -> pd.DataFrame:
    return pd.DataFrame([row for r in reports for row in r.summary_rows()], columns=SUMMARY_COLUMNS)


def summary_path_for(path: Union[str, Path]) -> Path:
    path = Path(path)
    return path.with_name(f"{path.stem}_summary{path.suffix or '.csv'}")


def write_report(reports: Sequence[EvalReport], path: Union[str, Path]) -> Tuple[Path, Path]:
    """Escribe el CSV por repetición y, a su lado, el resumen media/std"""
    path = Path(path)
    summary = summary_path_for(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        report_frame(reports).to_csv(path, index=False, encoding="utf-8", float_format="%.17g")
        summary_frame(reports).to_csv(summary, index=False, encoding="utf-8", float_format="%.17g")
    except OSError as e:
        raise DatasetIOError(f"No se pudo escribir el informe en {path}: {e}") from e
    return path, summary


def _cell(report: EvalReport, metric: str, cls: str) -> str:
    if summary_value(report.runs[0], metric, cls) is None:
        return "-"
    s = report.stat(metric, cls)
    return f"{s.mean:.3f} ± {s.std:.3f}"


def format_k_table(reports: Sequence[EvalReport], cls: str = MACRO) -> str:
    """
    Métricas en filas, un k por columna, celdas 'media ± std'

    Accuracy es aciertos/consultas (todas con la macro, las de clases vistas
    con held-in); una clase suelta muestra su OvR accuracy.
    """
    shown = TABLE_METRICS if cls in (ALL, MACRO, HELD_IN) else CLASS_METRICS
    table = pd.DataFrame(
        {f"k = {r.k}": [_cell(r, m, ALL if (m == "accuracy" and cls == MACRO) else cls) for m in shown]
         for r in reports},
        index=[_METRIC_NAMES[m] for m in shown],
    )
    return table.to_string()


def format_per_class(report: EvalReport) -> str:
    """Desglose por clase; la clase no vista se marca con '*'"""
    rows: Dict[str, List[str]] = {}
    for c in report.class_ids:
        label = f"{c}*" if c == report.unseen_class else str(c)
        rows[label] = [_cell(report, m, str(c)) for m in METRICS]
    if report.held_in is not None:
        rows["held-in"] = [_cell(report, m, HELD_IN) for m in METRICS]
    table = pd.DataFrame.from_dict(rows, orient="index", columns=[_METRIC_NAMES[m] for m in METRICS])
    table.index.name = "class"
    return table.to_string()


def format_comparison(models: Mapping[str, Mapping[str, float]]) -> str:
    """Una fila por modelo: Accuracy, Precision, Recall, F-score"""
    table = pd.DataFrame(
        [
            [name, values["accuracy"], values["precision"], values["recall"], values["f1"]]
            for name, values in models.items()
        ],
        columns=["Model", "Accuracy", "Precision", "Recall", "F-score"],
    )
    return table.to_string(index=False, float_format=lambda v: f"{v:.3f}")
