"""
Tripletas: muestreo, pérdida y minería
"""
from .sampling import Triplet, Margin, sample_triplets, group_by_class
from .loss import triplet_loss, batch_triplet_loss, triplet_losses, triplet_index_arrays
from .mining import select_semi_hard

__all__ = [
    'Triplet', 'Margin', 'sample_triplets', 'group_by_class',
    'triplet_loss', 'batch_triplet_loss', 'triplet_losses', 'triplet_index_arrays',
    'select_semi_hard',
]
