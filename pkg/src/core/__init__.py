"""
Núcleo numérico: tensores, autodiff, operaciones y errores comunes
"""
from .errors import (
    LesionShotError, DimensionError, ContractViolation, ConfigError, CheckpointError,
    SamplingError, SupportError, LabelError, ProtocolError, DatasetLoadError, DatasetIOError,
)
from .tensor import (
    Tensor, ComputeGraph, Node, backward, grad_of, no_grad, current_graph,
    reset_default_graph, as_array,
)
from .gradcheck import finite_difference_check, GradCheckResult, relative_error
from . import ops

__all__ = [
    # Errores
    'LesionShotError', 'DimensionError', 'ContractViolation', 'ConfigError',
    'CheckpointError', 'SamplingError', 'SupportError', 'LabelError',
    'ProtocolError', 'DatasetLoadError', 'DatasetIOError',

    # Autodiff
    'Tensor', 'ComputeGraph', 'Node', 'backward', 'grad_of', 'no_grad',
    'current_graph', 'reset_default_graph', 'as_array',

    # Verificación
    'finite_difference_check', 'GradCheckResult', 'relative_error',
    'ops',
]
