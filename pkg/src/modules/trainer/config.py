"""
Configuración y registro de entrenamiento
"""
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import List, Literal, Optional, Union

import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from core.errors import ConfigError
from modules.net.presets import available_presets


class TrainMode(str, Enum):
    """Modos de entrenamiento"""
    TRIPLET = "triplet"          # Red siamesa con pérdida triplet
    CLASSIFIER = "classifier"    # Baseline softmax de C clases


class TrainConfig(BaseModel):
    """Hiperparámetros validados antes de cualquier paso de entrenamiento"""
    model_config = ConfigDict(frozen=True, use_enum_values=False)

    mode: TrainMode = TrainMode.TRIPLET
    preset: str = "alex-lite"
    learning_rate: float = Field(0.001, ge=0.0)
    momentum: float = Field(0.9, ge=0.0, lt=1.0)
    epochs: int = Field(50, ge=1)
    batch_size: int = Field(32, ge=1)
    margin: float = Field(0.2, ge=0.0)
    augment: bool = True
    rng_seed: int = 7
    embedding_dim: int = Field(128, ge=1)
    normalize: bool = False
    mining: Literal["random", "semi-hard"] = "random"
    rotation: Literal["right-angle", "arbitrary"] = "right-angle"
    workers: int = Field(1, ge=1)

    @field_validator("preset")
    @classmethod
    def _known_preset(cls, value: str) -> str:
        if value not in available_presets():
            raise ValueError(f"preset desconocido '{value}', disponibles: {available_presets()}")
        return value

    @classmethod
    def create(cls, **kwargs) -> "TrainConfig":
        """Como el constructor, pero los errores de validación son ConfigError"""
        try:
            return cls(**kwargs)
        except ValidationError as e:
            problems = "; ".join(f"{'.'.join(map(str, err['loc']))}: {err['msg']}" for err in e.errors())
            raise ConfigError(f"TrainConfig inválida: {problems}") from e


@dataclass
class EpochRecord:
    epoch: int
    mean_loss: float
    seconds: float


@dataclass
class TrainLog:
    """Una entrada por época completada"""
    epochs: List[EpochRecord] = field(default_factory=list)
    checkpoint_path: Optional[str] = None

    def append(self, epoch: int, mean_loss: float, seconds: float) -> None:
        self.epochs.append(EpochRecord(epoch, mean_loss, seconds))

    @property
    def losses(self) -> List[float]:
        return [e.mean_loss for e in self.epochs]

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            [(e.epoch, e.mean_loss, e.seconds) for e in self.epochs],
            columns=["epoch", "mean_loss", "seconds"],
        )

    def write_csv(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        self.to_frame().to_csv(path, index=False, encoding="utf-8", float_format="%.17g")
        return path
