"""
Métricas, barrido de k y protocolo de clase no vista
"""
from .confusion import ConfusionMatrix, confusion
from .metrics import (
    CLASS_METRICS, METRICS, ClassMetrics, MetricSummary, class_metrics, macro_average, metrics, subset_accuracy,
)
from .sweep import ALL, HELD_IN, MACRO, EvalReport, MetricStat, k_sweep, mean_std, summary_value
from .unseen import unseen_class_eval, unseen_class_report
from .report import (
    REPORT_COLUMNS, SUMMARY_COLUMNS, format_comparison, format_k_table, format_per_class,
    report_frame, summary_frame, summary_path_for, write_report,
)

__all__ = [
    # Confusión y métricas
    'ConfusionMatrix', 'confusion',
    'CLASS_METRICS', 'METRICS', 'ClassMetrics', 'MetricSummary', 'class_metrics', 'macro_average', 'metrics',
    'subset_accuracy',

    # Protocolos
    'ALL', 'HELD_IN', 'MACRO', 'EvalReport', 'MetricStat', 'k_sweep', 'mean_std', 'summary_value',
    'unseen_class_eval', 'unseen_class_report',

    # Informes
    'REPORT_COLUMNS', 'SUMMARY_COLUMNS', 'format_comparison', 'format_k_table', 'format_per_class',
    'report_frame', 'summary_frame', 'summary_path_for', 'write_report',
]
