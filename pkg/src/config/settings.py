from typing import List

from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    model_config = SettingsConfigDict(env_file=".env", env_prefix="LESIONSHOT_", extra="ignore")

    MASTER_SEED: int = 7
    LOG_LEVEL: str = "INFO"

    # Datos sintéticos
    DATA_DIR: str = "data/synthetic"
    N_PER_CLASS: int = 200
    IMAGE_SIZE: int = 64
    TRAIN_FRACTION: float = 0.7
    UNSEEN_CLASS: int = 4

    # Red
    ARCH: str = "alex-lite"
    EMBEDDING_DIM: int = 128

    # Entrenamiento
    LEARNING_RATE: float = 0.001
    MOMENTUM: float = 0.9
    EPOCHS: int = 50
    FULL_EPOCHS: int = 150
    BATCH_SIZE: int = 32
    MARGIN: float = 0.2

    # Evaluación k-shot
    K_VALUES: List[int] = [1, 3, 5, 7, 9]
    K_DEFAULT: int = 7
    REPEATS: int = 5
    QUERY_TOP: int = 10


settings = Settings()
