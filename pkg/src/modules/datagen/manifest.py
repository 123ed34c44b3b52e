"""
Manifest CSV (path,label,split,seed) y fichero auxiliar dataset.json
"""
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Union

import pandas as pd
from pydantic import BaseModel, ValidationError

from core.errors import DatasetIOError, DatasetLoadError

MANIFEST_NAME = "manifest.csv"
INFO_NAME = "dataset.json"
MANIFEST_COLUMNS = ["path", "label", "split", "seed"]


class DatasetInfo(BaseModel):
    """Contenido de dataset.json"""
    seed: int
    image_size: int
    n_per_class: int
    unseen_protocol: bool
    unseen_class: int = 4
    train_fraction: float = 0.7
    classes: List[int]
    counts: Dict[str, Dict[str, int]]


@dataclass(frozen=True)
class ManifestRecord:
    path: str
    label: int
    split: str
    seed: int

    @property
    def frame_id(self) -> str:
        return self.path[:-4] if self.path.endswith(".png") else self.path


@dataclass
class DatasetManifest:
    records: List[ManifestRecord]
    seed: int
    image_size: int
    n_per_class: int
    unseen_protocol: bool = False
    unseen_class: int = 4
    train_fraction: float = 0.7
    root: Optional[Path] = None

    def __len__(self) -> int:
        return len(self.records)

    def counts(self) -> Dict[str, Dict[str, int]]:
        out: Dict[str, Dict[str, int]] = {}
        for r in self.records:
            per_class = out.setdefault(str(r.label), {"train": 0, "test": 0})
            per_class[r.split] += 1
        return dict(sorted(out.items(), key=lambda kv: int(kv[0])))

    def info(self) -> DatasetInfo:
        return DatasetInfo(
            seed=self.seed,
            image_size=self.image_size,
            n_per_class=self.n_per_class,
            unseen_protocol=self.unseen_protocol,
            unseen_class=self.unseen_class,
            train_fraction=self.train_fraction,
            classes=sorted({r.label for r in self.records}),
            counts=self.counts(),
        )

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame([(r.path, r.label, r.split, r.seed) for r in self.records], columns=MANIFEST_COLUMNS)

    def write(self, root: Union[str, Path]) -> Path:
        root = Path(root)
        path = root / MANIFEST_NAME
        try:
            root.mkdir(parents=True, exist_ok=True)
            self.to_frame().to_csv(path, index=False, encoding="utf-8")
            (root / INFO_NAME).write_text(self.info().model_dump_json(indent=2) + "\n", encoding="utf-8")
        except OSError as e:
            raise DatasetIOError(f"No se pudo escribir el manifest en {root}: {e}") from e
        self.root = root
        return path


def manifest_path(path: Union[str, Path]) -> Path:
    """Acepta el directorio del dataset o la ruta del CSV"""
    path = Path(path)
    return path / MANIFEST_NAME if path.is_dir() else path


def read_info(root: Union[str, Path]) -> Optional[DatasetInfo]:
    info_path = Path(root) / INFO_NAME
    if not info_path.exists():
        return None
    try:
        return DatasetInfo.model_validate_json(info_path.read_text(encoding="utf-8"))
    except (OSError, UnicodeDecodeError, ValidationError) as e:
        raise DatasetLoadError(f"{info_path} inválido: {e}") from e


def read_manifest(path: Union[str, Path]) -> pd.DataFrame:
    path = manifest_path(path)
    try:
        frame = pd.read_csv(path, dtype={"path": str, "split": str})
    except (OSError, UnicodeDecodeError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise DatasetLoadError(f"No se pudo leer el manifest {path}: {e}") from e
    missing = [c for c in MANIFEST_COLUMNS if c not in frame.columns]
    if missing:
        raise DatasetLoadError(f"{path}: faltan columnas {missing}")
    return frame[MANIFEST_COLUMNS]
