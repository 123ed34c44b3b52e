import json
import shutil
import sys

import numpy as np
import pandas as pd
import pytest
from click.testing import CliRunner
from loguru import logger

import main
from main import cli
from modules.datagen import MANIFEST_NAME, load_dataset
from modules.evalharness import REPORT_COLUMNS
from modules.net import build, read_checkpoint
from modules.trainer import predict_classes


@pytest.fixture(autouse=True)
def restore_logger():
    yield
    logger.remove()
    logger.add(sys.stderr, level="WARNING")


def run(*args):
    return CliRunner().invoke(cli, ["--log-level", "WARNING", *[str(a) for a in args]])


TRAIN_FLAGS = ("--epochs", 1, "--batch-size", 6, "--lr", 0.001, "--seed", 5)


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    """Dataset generado, checkpoint triplet y embeddings de todos los fotogramas"""
    root = tmp_path_factory.mktemp("cli")
    data = root / "data"
    assert run("gen-data", "--out", data, "--n-per-class", 10, "--size", 32, "--seed", 3,
               "--unseen-protocol").exit_code == 0
    assert run("train", "--data", data, "--out", root / "model.ckpt", *TRAIN_FLAGS).exit_code == 0
    assert run("embed", "--checkpoint", root / "model.ckpt", "--data", data, "--split", "all",
               "--out", root / "emb.jsonl").exit_code == 0
    return root


def test_gen_data_writes_every_frame(workspace):
    assert len(list((workspace / "data").glob("class_*/*.png"))) == 50


def test_gen_data_invalid_output_dir(tmp_path):
    occupied = tmp_path / "file"
    occupied.write_text("x", encoding="utf-8")
    result = run("gen-data", "--out", occupied / "nested", "--n-per-class", 1, "--size", 32)
    assert result.exit_code == 2


def test_gen_data_rejects_tiny_frames(tmp_path):
    assert run("gen-data", "--out", tmp_path / "d", "--size", 16).exit_code == 2


def test_train_outputs(workspace):
    checkpoint = read_checkpoint(workspace / "model.ckpt")
    assert checkpoint.metadata["epochs"] == 1
    assert checkpoint.train_classes == [0, 1, 2, 3]
    log = pd.read_csv(workspace / "model.log.csv")
    assert list(log.columns) == ["epoch", "mean_loss", "seconds"]
    assert log["epoch"].tolist() == [1]


def test_train_is_reproducible(workspace, tmp_path):
    result = run("train", "--data", workspace / "data", "--out", tmp_path / "again.ckpt", *TRAIN_FLAGS)
    assert result.exit_code == 0
    assert (tmp_path / "again.ckpt").read_bytes() == (workspace / "model.ckpt").read_bytes()


def test_train_zero_lr_keeps_init(workspace, tmp_path):
    out = tmp_path / "frozen.ckpt"
    result = run("train", "--data", workspace / "data", "--out", out, "--epochs", 1, "--batch-size", 6, "--lr", 0,
                 "--seed", 9)
    assert result.exit_code == 0, result.output
    fresh = build("alex-lite", 9, embedding_dim=128)
    checkpoint = read_checkpoint(out)
    for path, tensor in fresh.params.items():
        assert checkpoint.params[path].tobytes() == tensor.data.tobytes()


def test_train_invalid_momentum(workspace, tmp_path):
    result = run("train", "--data", workspace / "data", "--out", tmp_path / "m.ckpt", "--momentum", 1.5)
    assert result.exit_code == 2


def test_embed_store(workspace):
    lines = (workspace / "emb.jsonl").read_text(encoding="utf-8").splitlines()
    assert len(lines) == 50
    record = json.loads(lines[0])
    assert record["id"] == "class_0/frame_00000"
    assert len(record["vec"]) == 128


def test_embed_rerun_is_identical(workspace, tmp_path):
    out = tmp_path / "again.jsonl"
    assert run("embed", "--checkpoint", workspace / "model.ckpt", "--data", workspace / "data", "--split", "all",
               "--out", out).exit_code == 0
    assert out.read_bytes() == (workspace / "emb.jsonl").read_bytes()


def test_embed_test_split_count(workspace, tmp_path):
    out = tmp_path / "test.jsonl"
    assert run("embed", "--checkpoint", workspace / "model.ckpt", "--data", workspace / "data",
               "--out", out).exit_code == 0
    assert len(out.read_text(encoding="utf-8").splitlines()) == 4 * 3 + 10


def test_eval_writes_report(workspace):
    out = workspace / "reports" / "eval.csv"
    result = run("eval", "--embeddings", workspace / "emb.jsonl", "--k", 3, "--repeats", 2, "--out", out)
    assert result.exit_code == 0, result.output
    rows = pd.read_csv(out)
    assert list(rows.columns) == REPORT_COLUMNS
    assert set(rows["repeat"]) == {1, 2}
    assert (workspace / "reports" / "eval_summary.csv").exists()


def test_eval_unseen_class_with_checkpoint(workspace):
    result = run("eval", "--embeddings", workspace / "emb.jsonl", "--k", 5, "--repeats", 1, "--unseen-class", 4,
                 "--checkpoint", workspace / "model.ckpt", "--out", workspace / "reports" / "unseen.csv")
    assert result.exit_code == 0, result.output
    assert "4*" in result.output


def test_eval_k_too_large(workspace):
    result = run("eval", "--embeddings", workspace / "emb.jsonl", "--k", 10, "--out", workspace / "x.csv")
    assert result.exit_code == 2
    assert "k=10" in result.output


def test_sweep_k_report(workspace):
    out = workspace / "reports" / "sweep.csv"
    result = run("sweep-k", "--embeddings", workspace / "emb.jsonl", "--ks", "1,3", "--repeats", 2, "--out", out)
    assert result.exit_code == 0, result.output
    rows = pd.read_csv(out)
    assert sorted(set(rows["k"])) == [1, 3]
    assert "k = 1" in result.output


def test_sweep_k_bad_list(workspace):
    result = run("sweep-k", "--embeddings", workspace / "emb.jsonl", "--ks", "1,x")
    assert result.exit_code == 2


def test_query_returns_template_first(workspace):
    template = workspace / "data" / "class_1" / "frame_00002.png"
    out = workspace / "query.csv"
    result = run("query", "--checkpoint", workspace / "model.ckpt", "--template", template,
                 "--data", workspace / "data", "--top", 4, "--out", out)
    assert result.exit_code == 0, result.output
    table = pd.read_csv(out)
    assert len(table) == 4
    assert table.loc[0, "id"] == "class_1/frame_00002"
    assert table.loc[0, "distance"] == pytest.approx(0.0, abs=1e-12)
    assert table["distance"].is_monotonic_increasing


def test_compare_against_classifier(workspace):
    classifier = workspace / "classifier.ckpt"
    assert run("train", "--data", workspace / "data", "--mode", "classifier", "--out", classifier,
               *TRAIN_FLAGS).exit_code == 0
    result = run("compare", "--siamese", f"Siamese-AlexNet={workspace / 'emb.jsonl'}", "--classifier", classifier,
                 "--data", workspace / "data", "--k", 3, "--repeats", 1)
    assert result.exit_code == 0, result.output
    assert "Siamese-AlexNet" in result.output
    assert "Classifier-alex-lite" in result.output


def test_config_file_defaults(workspace, tmp_path):
    config = tmp_path / "run.conf"
    config.write_text("seed = 5\ntrain.epochs = 1\ntrain.batch-size = 6\n", encoding="utf-8")
    out = tmp_path / "from_config.ckpt"
    result = CliRunner().invoke(cli, ["--log-level", "WARNING", "--config", str(config), "train",
                                      "--data", str(workspace / "data"), "--out", str(out)])
    assert result.exit_code == 0, result.output
    assert out.read_bytes() == (workspace / "model.ckpt").read_bytes()


def test_config_file_unknown_key(workspace, tmp_path):
    config = tmp_path / "bad.conf"
    config.write_text("train.warmup = 3\n", encoding="utf-8")
    result = CliRunner().invoke(cli, ["--config", str(config), "train", "--data", str(workspace / "data")])
    assert result.exit_code == 2


def test_malformed_manifest_label_is_a_data_error(workspace, tmp_path):
    data = tmp_path / "data"
    shutil.copytree(workspace / "data", data)
    manifest = pd.read_csv(data / MANIFEST_NAME, dtype=str)
    manifest.loc[0, "label"] = "cero"
    manifest.to_csv(data / MANIFEST_NAME, index=False)
    result = run("embed", "--checkpoint", workspace / "model.ckpt", "--data", data, "--out", tmp_path / "e.jsonl")
    assert result.exit_code == 3
    assert "Traceback" not in result.output
    assert "label" in result.output


def test_unexpected_error_exits_with_runtime_code(workspace, tmp_path, monkeypatch):
    def broken(path):
        raise RuntimeError("disco desconectado")

    monkeypatch.setattr(main, "load_dataset", broken)
    result = run("embed", "--checkpoint", workspace / "model.ckpt", "--data", workspace / "data",
                 "--out", tmp_path / "e.jsonl")
    assert result.exit_code == 3
    assert "disco desconectado" in result.output
    assert "Traceback" not in result.output


def test_embed_rejects_classifier_checkpoint(workspace, tmp_path):
    classifier = tmp_path / "clf.ckpt"
    assert run("train", "--data", workspace / "data", "--mode", "classifier", "--out", classifier,
               *TRAIN_FLAGS).exit_code == 0
    result = run("embed", "--checkpoint", classifier, "--data", workspace / "data", "--out", tmp_path / "e.jsonl")
    assert result.exit_code == 2


@pytest.mark.slow
def test_end_to_end_protocol(tmp_path):
    """Protocolo por defecto: 5 clases x 200 fotogramas de 64px, clase 4 no vista, alex-lite 50 épocas"""
    data = tmp_path / "data"
    assert run("gen-data", "--out", data, "--unseen-protocol").exit_code == 0
    assert run("train", "--data", data, "--out", tmp_path / "m.ckpt").exit_code == 0
    assert run("embed", "--checkpoint", tmp_path / "m.ckpt", "--data", data, "--split", "test",
               "--out", tmp_path / "e.jsonl").exit_code == 0
    result = run("sweep-k", "--embeddings", tmp_path / "e.jsonl", "--unseen-class", 4,
                 "--out", tmp_path / "sweep.csv")
    assert result.exit_code == 0, result.output

    losses = pd.read_csv(tmp_path / "m.log.csv")["mean_loss"]
    assert len(losses) == 50
    assert losses.iloc[-1] < losses.iloc[0]

    summary = pd.read_csv(tmp_path / "sweep_summary.csv").set_index(["k", "metric", "class"])
    assert summary[["mean", "std"]].notna().all().all()
    assert summary.loc[(7, "accuracy", "held-in"), "mean"] >= 0.90
    assert summary.loc[(7, "recall", "4"), "mean"] >= 0.70

    classifier = tmp_path / "clf.ckpt"
    assert run("train", "--data", data, "--mode", "classifier", "--out", classifier).exit_code == 0
    baseline = read_checkpoint(classifier)
    test = load_dataset(data).subset(split="test", classes=baseline.train_classes)
    predictions = predict_classes(baseline.to_net(), test.images)
    assert float(np.mean(predictions == test.labels)) >= 0.90
