"""
Clasificación k-shot sobre embeddings
"""
from .support import SupportSet, build_support
from .classify import AGGREGATIONS, Prediction, class_scores, classify, classify_batch, predicted_labels
from .store import EmbeddingRecord, EmbeddingStore, format_record, read_embeddings, write_embeddings

__all__ = [
    'SupportSet', 'build_support',
    'AGGREGATIONS', 'Prediction', 'class_scores', 'classify', 'classify_batch', 'predicted_labels',
    'EmbeddingRecord', 'EmbeddingStore', 'format_record', 'read_embeddings', 'write_embeddings',
]
