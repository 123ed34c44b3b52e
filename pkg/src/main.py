"""
CLI de lesionshot: datos sintéticos, entrenamiento, embeddings y evaluación k-shot

Códigos de salida: 0 éxito, 2 error de uso/configuración, 3 error de ejecución/datos.
"""
import os
import sys
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import click
import numpy as np
import pandas as pd
from loguru import logger

from config.run_config import RunConfig, build_default_map, load_config_file
from config.settings import settings
from core.errors import ConfigError, LesionShotError
from core.tensor import no_grad
from modules.datagen import Dataset, generate_dataset, load_dataset, read_png
from modules.evalharness import (
    MACRO, confusion, format_comparison, format_k_table, format_per_class, k_sweep, metrics,
    unseen_class_report, write_report,
)
from modules.fewshot import AGGREGATIONS, read_embeddings, write_embeddings
from modules.net import available_presets, embed_all, read_checkpoint, save_checkpoint
from modules.trainer import TrainConfig, predict_classes, preprocess, preprocess_batch, train


LOG_FORMAT = "<green>{time:HH:mm:ss}</green> | <level>{level: <8}</level> | {message}"


def setup_logging(level: str) -> None:
    logger.remove()
    logger.add(sys.stderr, level=level.upper(), format=LOG_FORMAT)


class LesionShotCLI(click.Group):
    """Grupo que traduce los errores de dominio a mensaje + código de salida"""

    def invoke(self, ctx: click.Context):
        try:
            return super().invoke(ctx)
        except LesionShotError as e:
            logger.debug(f"{type(e).__name__}: {e}")
            click.echo(f"❌ {e}", err=True)
            ctx.exit(e.exit_code)
        except (click.exceptions.ClickException, click.exceptions.Exit, click.exceptions.Abort):
            raise
        except Exception as e:
            logger.opt(exception=e).debug("Traza del error inesperado")
            click.echo(f"❌ Error inesperado {type(e).__name__}: {e}", err=True)
            ctx.exit(LesionShotError.exit_code)


def _record_run(ctx: click.Context, **params) -> RunConfig:
    run = RunConfig(
        command=ctx.info_name,
        params=params,
        config_file=(ctx.find_root().params or {}).get("config_file"),
        master_seed=params.get("seed"),
    )
    logger.info(f"⚙️ {run.command}: {run.to_dict()['params']}")
    return run


def _check_output_dir(path: Path) -> None:
    """El directorio (o su primer ancestro existente) debe ser un directorio escribible"""
    existing = Path(path).absolute()
    while not existing.exists():
        existing = existing.parent
    if not existing.is_dir():
        raise ConfigError(f"Directorio de salida inválido: {path} ({existing} no es un directorio)")
    if not os.access(existing, os.W_OK):
        raise ConfigError(f"Directorio de salida sin permiso de escritura: {path}")


def _check_output_file(path: Path) -> None:
    if path.exists() and path.is_dir():
        raise ConfigError(f"{path} es un directorio, se esperaba un fichero")
    _check_output_dir(path.parent)


def _parse_ints(text: str, name: str) -> List[int]:
    try:
        values = [int(v) for v in text.replace(" ", "").split(",") if v]
    except ValueError as e:
        raise ConfigError(f"{name}: se esperaba una lista de enteros separada por comas, recibido '{text}'") from e
    if not values:
        raise ConfigError(f"{name}: lista vacía")
    return values


def _frames(data: Path, split: str, apply_preprocess: bool) -> Dataset:
    dataset = load_dataset(data)
    if split != "all":
        dataset = dataset.subset(split=split)
    if apply_preprocess:
        dataset = Dataset(preprocess_batch(dataset.images), dataset.labels, dataset.splits, dataset.ids, dataset.root)
    return dataset


# ============================================================================
# Grupo
# ============================================================================

@click.group(cls=LesionShotCLI)
@click.option("--config", "config_file", type=click.Path(dir_okay=False), default=None,
              help="Fichero key=value con valores por defecto (cmd.key para un solo comando)")
@click.option("--log-level", default=None, help="Nivel de log (DEBUG, INFO, WARNING...)")
@click.pass_context
def cli(ctx: click.Context, config_file: Optional[str], log_level: Optional[str]):
    """Clasificación k-shot de lesiones con redes siamesas y pérdida triplet"""
    setup_logging(log_level or settings.LOG_LEVEL)
    if config_file:
        commands = {name: [p.name for p in cmd.params] for name, cmd in cli.commands.items()}
        ctx.default_map = build_default_map(load_config_file(config_file), commands)


# ============================================================================
# Comandos
# ============================================================================

@cli.command("gen-data")
@click.option("--out", type=click.Path(file_okay=False, path_type=Path), default=settings.DATA_DIR)
@click.option("--n-per-class", type=click.IntRange(min=1), default=settings.N_PER_CLASS)
@click.option("--size", type=click.IntRange(min=32), default=settings.IMAGE_SIZE)
@click.option("--seed", type=int, default=settings.MASTER_SEED)
@click.option("--unseen-protocol/--no-unseen-protocol", default=False,
              help=f"La clase {settings.UNSEEN_CLASS} queda solo en test")
@click.option("--workers", type=click.IntRange(min=1), default=1)
@click.pass_context
def gen_data(ctx, out: Path, n_per_class: int, size: int, seed: int, unseen_protocol: bool, workers: int):
    """Genera el dataset sintético (PNG + manifest.csv + dataset.json)"""
    _record_run(ctx, out=out, n_per_class=n_per_class, size=size, seed=seed,
                unseen_protocol=unseen_protocol, workers=workers)
    _check_output_dir(out)
    manifest = generate_dataset(
        out, n_per_class=n_per_class, size=size, seed=seed, unseen_protocol=unseen_protocol,
        train_fraction=settings.TRAIN_FRACTION, unseen_class=settings.UNSEEN_CLASS, workers=workers,
    )
    click.echo(f"{len(manifest)} fotogramas en {out}")


@cli.command("train")
@click.option("--data", type=click.Path(exists=True, path_type=Path), default=settings.DATA_DIR)
@click.option("--mode", type=click.Choice(["triplet", "classifier"]), default="triplet")
@click.option("--arch", type=click.Choice(available_presets()), default=settings.ARCH)
@click.option("--epochs", type=int, default=settings.EPOCHS)
@click.option("--full-epochs", is_flag=True, default=False, help=f"Usa {settings.FULL_EPOCHS} épocas")
@click.option("--lr", type=float, default=settings.LEARNING_RATE)
@click.option("--momentum", type=float, default=settings.MOMENTUM)
@click.option("--margin", type=float, default=settings.MARGIN)
@click.option("--batch-size", type=int, default=settings.BATCH_SIZE)
@click.option("--mining", type=click.Choice(["random", "semi-hard"]), default="random")
@click.option("--rotation", type=click.Choice(["right-angle", "arbitrary"]), default="right-angle")
@click.option("--augment/--no-augment", default=True)
@click.option("--normalize/--no-normalize", default=False)
@click.option("--preprocess", "apply_preprocess", is_flag=True, default=False)
@click.option("--workers", type=int, default=1)
@click.option("--seed", type=int, default=settings.MASTER_SEED)
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path), default=Path("runs/model.ckpt"))
@click.option("--log-csv", type=click.Path(dir_okay=False, path_type=Path), default=None)
@click.pass_context
def train_cmd(ctx, data: Path, mode: str, arch: str, epochs: int, full_epochs: bool, lr: float, momentum: float,
              margin: float, batch_size: int, mining: str, rotation: str, augment: bool, normalize: bool,
              apply_preprocess: bool, workers: int, seed: int, out: Path, log_csv: Optional[Path]):
    """Entrena la red (tripletas) o el clasificador baseline"""
    _record_run(ctx, data=data, mode=mode, arch=arch, epochs=epochs, lr=lr, momentum=momentum, margin=margin,
                batch_size=batch_size, mining=mining, rotation=rotation, seed=seed, out=out)
    config = TrainConfig.create(
        mode=mode, preset=arch, learning_rate=lr, momentum=momentum,
        epochs=settings.FULL_EPOCHS if full_epochs else epochs, batch_size=batch_size, margin=margin,
        augment=augment, rng_seed=seed, embedding_dim=settings.EMBEDDING_DIM, normalize=normalize,
        mining=mining, rotation=rotation, workers=workers,
    )
    log_csv = log_csv or out.with_suffix(".log.csv")
    _check_output_file(out)
    _check_output_file(log_csv)

    checkpoint, log = train(_frames(data, "all", apply_preprocess), config)
    save_checkpoint(checkpoint, out)
    log.checkpoint_path = str(out)
    log.write_csv(log_csv)
    click.echo(f"checkpoint: {out}\nlog: {log_csv}")


@cli.command("embed")
@click.option("--checkpoint", type=click.Path(exists=True, dir_okay=False, path_type=Path), required=True)
@click.option("--data", type=click.Path(exists=True, path_type=Path), default=settings.DATA_DIR)
@click.option("--split", type=click.Choice(["train", "test", "all"]), default="test")
@click.option("--preprocess", "apply_preprocess", is_flag=True, default=False)
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path), default=Path("runs/embeddings.jsonl"))
@click.pass_context
def embed_cmd(ctx, checkpoint: Path, data: Path, split: str, apply_preprocess: bool, out: Path):
    """Extrae los embeddings de un split a JSON-lines"""
    _record_run(ctx, checkpoint=checkpoint, data=data, split=split, out=out)
    _check_output_file(out)
    net = read_checkpoint(checkpoint).to_net()
    frames = _frames(data, split, apply_preprocess)
    vectors = embed_all(net, frames.images)
    write_embeddings(out, frames.ids, [int(l) for l in frames.labels], vectors)
    click.echo(f"{len(frames)} embeddings en {out}")


def _store_arrays(path: Path) -> Tuple[np.ndarray, np.ndarray]:
    store = read_embeddings(path)
    return store.vectors, store.label_array()


@cli.command("eval")
@click.option("--embeddings", type=click.Path(exists=True, dir_okay=False, path_type=Path), required=True)
@click.option("--k", type=click.IntRange(min=1), default=settings.K_DEFAULT)
@click.option("--repeats", type=click.IntRange(min=1), default=settings.REPEATS)
@click.option("--seed", type=int, default=settings.MASTER_SEED)
@click.option("--unseen-class", type=int, default=None, help="Clase ausente del entrenamiento")
@click.option("--checkpoint", type=click.Path(exists=True, dir_okay=False, path_type=Path), default=None,
              help="Checkpoint de entrenamiento para comprobar el protocolo de clase no vista")
@click.option("--aggregate", type=click.Choice(AGGREGATIONS), default="min")
@click.option("--workers", type=click.IntRange(min=1), default=1)
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path), default=Path("reports/eval.csv"))
@click.pass_context
def eval_cmd(ctx, embeddings: Path, k: int, repeats: int, seed: int, unseen_class: Optional[int],
             checkpoint: Optional[Path], aggregate: str, workers: int, out: Path):
    """Evaluación k-shot con redibujado del support set"""
    _record_run(ctx, embeddings=embeddings, k=k, repeats=repeats, seed=seed, unseen_class=unseen_class, out=out)
    _check_output_file(out)
    vectors, labels = _store_arrays(embeddings)
    if unseen_class is not None:
        train_classes = read_checkpoint(checkpoint).train_classes if checkpoint else None
        report = unseen_class_report(vectors, labels, k, seed, repeats, unseen_class, train_classes, aggregate)
    else:
        report = k_sweep(vectors, labels, [k], repeats, seed, aggregate=aggregate, workers=workers)[0]
    path, summary = write_report([report], out)
    click.echo(format_per_class(report))
    click.echo()
    click.echo(format_k_table([report]))
    click.echo(f"\ninforme: {path}\nresumen: {summary}")


@cli.command("sweep-k")
@click.option("--embeddings", type=click.Path(exists=True, dir_okay=False, path_type=Path), required=True)
@click.option("--ks", default=",".join(str(k) for k in settings.K_VALUES))
@click.option("--repeats", type=click.IntRange(min=1), default=settings.REPEATS)
@click.option("--seed", type=int, default=settings.MASTER_SEED)
@click.option("--unseen-class", type=int, default=None)
@click.option("--aggregate", type=click.Choice(AGGREGATIONS), default="min")
@click.option("--workers", type=click.IntRange(min=1), default=1)
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path), default=Path("reports/sweep_k.csv"))
@click.pass_context
def sweep_k_cmd(ctx, embeddings: Path, ks: str, repeats: int, seed: int, unseen_class: Optional[int],
                aggregate: str, workers: int, out: Path):
    """Barrido de k con media ± std sobre redibujados"""
    k_values = _parse_ints(ks, "--ks")
    if min(k_values) < 1:
        raise ConfigError(f"--ks: todos los k deben ser ≥ 1, recibido {k_values}")
    _record_run(ctx, embeddings=embeddings, ks=k_values, repeats=repeats, seed=seed, unseen_class=unseen_class,
                out=out)
    _check_output_file(out)
    vectors, labels = _store_arrays(embeddings)
    held_in = None
    if unseen_class is not None:
        held_in = sorted(int(c) for c in np.unique(labels) if c != unseen_class)
    reports = k_sweep(vectors, labels, k_values, repeats, seed, aggregate=aggregate, held_in=held_in,
                      unseen_class=unseen_class, workers=workers)
    path, summary = write_report(reports, out)
    click.echo(format_k_table(reports, MACRO))
    if held_in is not None:
        click.echo(f"\nClases vistas {held_in}:")
        click.echo(format_k_table(reports, "held-in"))
        click.echo(f"\nClase no vista {unseen_class}:")
        click.echo(format_k_table(reports, str(unseen_class)))
    click.echo(f"\ninforme: {path}\nresumen: {summary}")


@cli.command("query")
@click.option("--checkpoint", type=click.Path(exists=True, dir_okay=False, path_type=Path), required=True)
@click.option("--template", type=click.Path(exists=True, dir_okay=False, path_type=Path), required=True)
@click.option("--data", type=click.Path(exists=True, path_type=Path), default=settings.DATA_DIR)
@click.option("--split", type=click.Choice(["train", "test", "all"]), default="all")
@click.option("--top", type=click.IntRange(min=1), default=settings.QUERY_TOP)
@click.option("--preprocess", "apply_preprocess", is_flag=True, default=False)
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path), default=None)
@click.pass_context
def query_cmd(ctx, checkpoint: Path, template: Path, data: Path, split: str, top: int, apply_preprocess: bool,
              out: Optional[Path]):
    """Fotogramas más cercanos a una imagen plantilla"""
    _record_run(ctx, checkpoint=checkpoint, template=template, data=data, split=split, top=top)
    if out is not None:
        _check_output_file(out)
    net = read_checkpoint(checkpoint).to_net()
    image = read_png(template)
    if apply_preprocess:
        image = preprocess(image)
    frames = _frames(data, split, apply_preprocess)

    query = embed_all(net, image[None])[0]
    vectors = embed_all(net, frames.images)
    distances = ((vectors - query) ** 2).sum(axis=1)
    # Empates en orden estable por id de fotograma
    order = sorted(range(len(frames)), key=lambda i: (distances[i], frames.ids[i]))[:top]
    table = pd.DataFrame({
        "rank": range(1, len(order) + 1),
        "id": [frames.ids[i] for i in order],
        "label": [int(frames.labels[i]) for i in order],
        "distance": [float(distances[i]) for i in order],
    })
    if out is not None:
        out.parent.mkdir(parents=True, exist_ok=True)
        table.to_csv(out, index=False, encoding="utf-8", float_format="%.17g")
    click.echo(table.to_string(index=False))


def _parse_model(spec: str) -> Tuple[str, Path]:
    name, sep, path = spec.partition("=")
    if not sep:
        path, name = spec, Path(spec).stem
    if not Path(path).is_file():
        raise ConfigError(f"No existe el almacén de embeddings {path}")
    return name, Path(path)


@cli.command("compare")
@click.option("--siamese", "siamese_models", multiple=True, required=True,
              help="Almacén de embeddings del modelo siamés, como NOMBRE=RUTA o RUTA")
@click.option("--classifier", type=click.Path(exists=True, dir_okay=False, path_type=Path), required=True)
@click.option("--data", type=click.Path(exists=True, path_type=Path), default=settings.DATA_DIR)
@click.option("--k", type=click.IntRange(min=1), default=settings.K_DEFAULT)
@click.option("--repeats", type=click.IntRange(min=1), default=settings.REPEATS)
@click.option("--seed", type=int, default=settings.MASTER_SEED)
@click.option("--preprocess", "apply_preprocess", is_flag=True, default=False)
@click.pass_context
def compare_cmd(ctx, siamese_models: Tuple[str, ...], classifier: Path, data: Path, k: int, repeats: int, seed: int,
                apply_preprocess: bool):
    """Modelos siameses frente al clasificador baseline sobre sus mismas clases"""
    models = [_parse_model(spec) for spec in siamese_models]
    _record_run(ctx, siamese=[str(p) for _, p in models], classifier=classifier, k=k, repeats=repeats, seed=seed)

    baseline = read_checkpoint(classifier)
    if baseline.metadata.get("mode") != "classifier":
        raise ConfigError(f"{classifier} no es un checkpoint de clasificador")
    classes = [int(c) for c in baseline.train_classes]
    test = _frames(data, "test", apply_preprocess).subset(classes=classes)

    rows: Dict[str, Dict[str, float]] = {}
    for name, path in models:
        vectors, labels = _store_arrays(path)
        keep = np.isin(labels, classes)
        report = k_sweep(vectors[keep], labels[keep], [k], repeats, seed)[0]
        rows[name] = {
            "accuracy": report.stat("accuracy", "all").mean,
            **{m: report.stat(m, MACRO).mean for m in ("precision", "recall", "f1")},
        }

    with no_grad():
        predictions = predict_classes(baseline.to_net(), test.images)
    summary = metrics(confusion(test.labels, predictions, len(classes)), classes)
    rows[f"Classifier-{baseline.preset}"] = {"accuracy": summary.accuracy, **{
        m: summary.macro[m] for m in ("precision", "recall", "f1")
    }}
    click.echo(format_comparison(rows))


def main():
    cli(prog_name="lesionshot")


if __name__ == "__main__":
    main()
