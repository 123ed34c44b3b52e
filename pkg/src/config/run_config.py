"""
Fichero de configuración key=value y registro de la ejecución

Formato:
    # comentario
    seed = 11
    train.epochs = 20        # solo para el comando train
    sweep-k.repeats = 3

Precedencia: flag de CLI > fichero > Settings.
"""
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, Iterable, Optional, Union

from core.errors import ConfigError


def _normalize(key: str) -> str:
    return key.strip().replace("-", "_")


def parse_config_text(text: str, source: str = "<config>") -> Dict[str, Dict[str, str]]:
    """
    Devuelve {comando|"*": {parametro: valor}}

    Raises:
        ConfigError: línea sin '=' o clave vacía
    """
    # dotenv_values acepta en silencio las líneas mal formadas; aquí son ConfigError con su número de línea
    entries: Dict[str, Dict[str, str]] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        content = line.split("#", 1)[0].strip()
        if not content:
            continue
        if "=" not in content:
            raise ConfigError(f"{source}:{lineno}: se esperaba 'clave = valor', encontrado '{content}'")
        key, value = (part.strip() for part in content.split("=", 1))
        if not key:
            raise ConfigError(f"{source}:{lineno}: clave vacía")
        command, _, name = key.rpartition(".")
        scope = command.strip().replace("_", "-") if command else "*"
        entries.setdefault(scope, {})[_normalize(name)] = value
    return entries


def load_config_file(path: Union[str, Path]) -> Dict[str, Dict[str, str]]:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as e:
        raise ConfigError(f"No se pudo leer el fichero de configuración {path}: {e}") from e
    return parse_config_text(text, source=str(path))


def build_default_map(entries: Dict[str, Dict[str, str]], commands: Dict[str, Iterable[str]]) -> Dict[str, Dict[str, str]]:
    """
    default_map de click a partir de las entradas del fichero

    Las claves sin comando se aplican a todos los comandos que tengan ese
    parámetro; las claves con comando ganan a las globales.
    """
    known = {name for params in commands.values() for name in params}
    for scope, values in entries.items():
        if scope != "*" and scope not in commands:
            raise ConfigError(f"Comando desconocido en la configuración: '{scope}'")
        target = known if scope == "*" else set(commands[scope])
        unknown = sorted(set(values) - target)
        if unknown:
            raise ConfigError(f"Claves desconocidas para '{scope}': {unknown}")

    default_map: Dict[str, Dict[str, str]] = {}
    for command, params in commands.items():
        params = set(params)
        merged = {k: v for k, v in entries.get("*", {}).items() if k in params}
        merged.update(entries.get(command, {}))
        if merged:
            default_map[command] = merged
    return default_map


@dataclass
class RunConfig:
    """Registro auditable de una ejecución de la CLI"""
    command: str
    params: Dict[str, Any] = field(default_factory=dict)
    config_file: Optional[str] = None
    master_seed: Optional[int] = None

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["params"] = {k: str(v) if isinstance(v, Path) else v for k, v in self.params.items()}
        return data
