"""
Dataset sintético tipo endoscopia: generación, manifest y carga
"""
from .dataset import SPLITS, Dataset
from .motifs import DEFAULT_SPECS, SynthClassSpec, available_motifs, default_specs, register_motif
from .image_io import read_png, save_png
from .manifest import (
    INFO_NAME, MANIFEST_COLUMNS, MANIFEST_NAME, DatasetInfo, DatasetManifest, ManifestRecord,
    read_info, read_manifest,
)
from .generator import field_of_view_mask, generate_dataset, generate_frame, split_counts
from .loader import load_dataset

__all__ = [
    'SPLITS', 'Dataset',
    'DEFAULT_SPECS', 'SynthClassSpec', 'available_motifs', 'default_specs', 'register_motif',
    'read_png', 'save_png',
    'INFO_NAME', 'MANIFEST_COLUMNS', 'MANIFEST_NAME', 'DatasetInfo', 'DatasetManifest', 'ManifestRecord',
    'read_info', 'read_manifest',
    'field_of_view_mask', 'generate_dataset', 'generate_frame', 'split_counts',
    'load_dataset',
]
