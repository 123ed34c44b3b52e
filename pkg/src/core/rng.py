"""
Sub-streams deterministas derivados de una semilla maestra
"""
import zlib

import numpy as np

STREAMS = ("data", "init", "sampling", "augment", "support", "mining")


def _stream_key(name: str) -> int:
    return zlib.crc32(name.encode("utf-8"))


def stream(seed: int, name: str, *index: int) -> np.random.Generator:
    """
    Generador para el sub-stream `name` de la semilla maestra

    Los índices extra (registro, repetición, k...) derivan streams hijos,
    de modo que la ejecución en paralelo y en serie produce lo mismo.
    """
    entropy = [int(seed) & 0xFFFFFFFF, _stream_key(name), *[int(i) for i in index]]
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy)))


def derived_seed(seed: int, name: str, *index: int) -> int:
    """Entero reproducible para guardar en manifests"""
    entropy = [int(seed) & 0xFFFFFFFF, _stream_key(name), *[int(i) for i in index]]
    return int(np.random.SeedSequence(entropy).generate_state(1)[0])
