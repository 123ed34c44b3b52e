"""
Jerarquía de errores del proyecto

Cada error lleva el código de salida que usa la CLI:
2 = uso/configuración, 3 = error de ejecución o de datos.
"""


class LesionShotError(Exception):
    """Error base de lesionshot"""
    exit_code: int = 3


class DimensionError(LesionShotError, ValueError):
    """Formas incompatibles entre tensores o imágenes"""


class ContractViolation(LesionShotError):
    """Precondición de una operación incumplida"""


class ConfigError(LesionShotError):
    """Configuración inválida (flags, fichero key=value, TrainConfig)"""
    exit_code = 2


class CheckpointError(LesionShotError):
    """Checkpoint corrupto, truncado o incoherente con su preset"""


class SamplingError(LesionShotError):
    """No se pueden muestrear tripletas válidas"""


class SupportError(LesionShotError):
    """Una clase no tiene muestras suficientes para el soporte k-shot"""
    exit_code = 2


class LabelError(LesionShotError, ValueError):
    """Etiqueta fuera de rango"""


class ProtocolError(LesionShotError):
    """Violación del protocolo de clase no vista"""


class DatasetLoadError(LesionShotError):
    """Manifest o fichero de imagen ilegible"""


class DatasetIOError(LesionShotError):
    """No se puede escribir el dataset en disco"""
