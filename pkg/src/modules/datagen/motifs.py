"""
Clases sintéticas: un motivo visual por clase sobre fondo de mucosa

Cada motivo es una función registrada que dibuja con ImageDraw sobre la
imagen RGB de fondo. Los rangos de parámetros se expresan relativos al
tamaño de la imagen, así 64px y 224px producen la misma escena.
"""
from dataclasses import dataclass
from typing import Callable, Dict, Tuple

import numpy as np
from PIL import ImageDraw

from core.errors import ConfigError

Range = Tuple[float, float]
Color = Tuple[float, float, float]
MotifFn = Callable[[ImageDraw.ImageDraw, "SynthClassSpec", int, Color, np.random.Generator], None]

_MOTIF_REGISTRY: Dict[str, MotifFn] = {}


def register_motif(name: str):
    """Decorador para registrar un motivo"""
    def decorator(fn: MotifFn) -> MotifFn:
        _MOTIF_REGISTRY[name] = fn
        return fn
    return decorator


def available_motifs():
    return sorted(_MOTIF_REGISTRY)


@dataclass(frozen=True)
class SynthClassSpec:
    class_id: int
    motif: str
    size_range: Range          # fracción del lado de la imagen
    count_range: Tuple[int, int]
    contrast_range: Range      # mezcla entre el color de fondo y el del motivo
    color: Color               # color del motivo en [0,1]
    hue_range: Tuple[Color, Color] = ((0.70, 0.33, 0.33), (0.86, 0.48, 0.46))
    noise_scale: float = 0.06

    def __post_init__(self):
        for name, (lo, hi) in (("size_range", self.size_range), ("count_range", self.count_range),
                               ("contrast_range", self.contrast_range)):
            if lo > hi:
                raise ConfigError(f"{self.motif}: {name} vacío ({lo} > {hi})")
        if self.motif not in _MOTIF_REGISTRY:
            raise ConfigError(f"Motivo desconocido '{self.motif}', disponibles: {available_motifs()}")

    def draw(self, canvas: ImageDraw.ImageDraw, size: int, base: Color, rng: np.random.Generator) -> None:
        contrast = rng.uniform(*self.contrast_range)
        color = tuple(b + contrast * (m - b) for b, m in zip(base, self.color))
        _MOTIF_REGISTRY[self.motif](canvas, self, size, color, rng)


def _rgb(color: Color) -> Tuple[int, int, int]:
    return tuple(int(round(255 * min(max(c, 0.0), 1.0))) for c in color)


def _center(size: int, rng: np.random.Generator, spread: float = 0.28) -> Tuple[float, float]:
    """Punto uniforme dentro de un disco centrado (queda dentro del campo de visión)"""
    r = spread * size * np.sqrt(rng.random())
    theta = rng.uniform(0.0, 2 * np.pi)
    return size / 2 + r * np.cos(theta), size / 2 + r * np.sin(theta)


def _count(spec: SynthClassSpec, rng: np.random.Generator) -> int:
    lo, hi = spec.count_range
    return int(rng.integers(lo, hi + 1))


# ============================================================================
# Motivos
# ============================================================================

@register_motif("vessel-web")
def draw_vessel_web(canvas, spec, size, color, rng):
    width = max(1, int(round(size / 40)))
    for _ in range(_count(spec, rng)):
        x, y = _center(size, rng, 0.35)
        points = [(x, y)]
        heading = rng.uniform(0.0, 2 * np.pi)
        for _ in range(int(rng.integers(3, 7))):
            heading += rng.normal(0.0, 0.6)
            step = rng.uniform(*spec.size_range) * size
            x, y = x + step * np.cos(heading), y + step * np.sin(heading)
            points.append((x, y))
        canvas.line(points, fill=_rgb(color), width=width)


@register_motif("dark-blob")
def draw_dark_blob(canvas, spec, size, color, rng):
    for _ in range(_count(spec, rng)):
        cx, cy = _center(size, rng)
        rx = rng.uniform(*spec.size_range) * size
        ry = rx * rng.uniform(0.6, 1.0)
        canvas.ellipse([cx - rx, cy - ry, cx + rx, cy + ry], fill=_rgb(color))


@register_motif("pale-plaque")
def draw_pale_plaque(canvas, spec, size, color, rng):
    for _ in range(_count(spec, rng)):
        cx, cy = _center(size, rng)
        rx = rng.uniform(*spec.size_range) * size
        ry = rx * rng.uniform(0.4, 0.8)
        canvas.rectangle([cx - rx, cy - ry, cx + rx, cy + ry], fill=_rgb(color))


@register_motif("speckle-field")
def draw_speckle_field(canvas, spec, size, color, rng):
    for _ in range(_count(spec, rng)):
        cx, cy = _center(size, rng, 0.42)
        r = max(0.5, rng.uniform(*spec.size_range) * size)
        canvas.ellipse([cx - r, cy - r, cx + r, cy + r], fill=_rgb(color))


@register_motif("ring-lesion")
def draw_ring_lesion(canvas, spec, size, color, rng):
    # Ocupa una región diminuta del fotograma
    width = max(1, int(round(size / 48)))
    for _ in range(_count(spec, rng)):
        cx, cy = _center(size, rng)
        r = max(2.0, rng.uniform(*spec.size_range) * size)
        canvas.ellipse([cx - r, cy - r, cx + r, cy + r], outline=_rgb(color), width=width)


DEFAULT_SPECS: Tuple[SynthClassSpec, ...] = (
    SynthClassSpec(0, "vessel-web", (0.06, 0.12), (5, 9), (0.7, 1.0), (0.45, 0.05, 0.08)),
    SynthClassSpec(1, "dark-blob", (0.12, 0.2), (1, 3), (0.75, 1.0), (0.18, 0.07, 0.05)),
    SynthClassSpec(2, "pale-plaque", (0.08, 0.16), (1, 3), (0.75, 1.0), (0.96, 0.92, 0.72)),
    SynthClassSpec(3, "speckle-field", (0.012, 0.025), (40, 80), (0.8, 1.0), (0.99, 0.97, 0.93)),
    SynthClassSpec(4, "ring-lesion", (0.04, 0.07), (1, 1), (0.8, 1.0), (0.98, 0.08, 0.14)),
)


def default_specs() -> Dict[int, SynthClassSpec]:
    specs = {s.class_id: s for s in DEFAULT_SPECS}
    if len({s.motif for s in DEFAULT_SPECS}) != len(DEFAULT_SPECS):
        raise ConfigError("Dos clases comparten motivo")
    return specs
