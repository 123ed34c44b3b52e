"""
Entrenamiento: optimizador, aumentación, preprocesado y bucles
"""
from .config import TrainConfig, TrainLog, TrainMode, EpochRecord
from .optimizer import SGDMomentum, sgd_momentum_step
from .augment import AugmentDraw, augment, apply_augmentation, draw_augmentation, hflip, vflip, rot90
from .preprocess import preprocess, preprocess_batch, center_crop, CROP_SIZE, OUTPUT_SIZE
from .trainer import train, train_classifier, predict_classes

__all__ = [
    'TrainConfig', 'TrainLog', 'TrainMode', 'EpochRecord',
    'SGDMomentum', 'sgd_momentum_step',
    'AugmentDraw', 'augment', 'apply_augmentation', 'draw_augmentation', 'hflip', 'vflip', 'rot90',
    'preprocess', 'preprocess_batch', 'center_crop', 'CROP_SIZE', 'OUTPUT_SIZE',
    'train', 'train_classifier', 'predict_classes',
]
