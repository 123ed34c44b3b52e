import numpy as np
import pandas as pd
import pytest

from core.errors import ContractViolation, LabelError, ProtocolError, SupportError
from modules.evalharness import (
    REPORT_COLUMNS, SUMMARY_COLUMNS, ConfusionMatrix, confusion, format_comparison, format_k_table,
    format_per_class, k_sweep, mean_std, metrics, summary_value, unseen_class_eval, unseen_class_report,
    write_report,
)


def brute_force_metrics(true, pred, num_classes):
    """Referencia con bucles anidados"""
    counts = [[0] * num_classes for _ in range(num_classes)]
    for t, p in zip(true, pred):
        counts[t][p] += 1
    total = len(true)
    per_class, included = [], []
    for c in range(num_classes):
        tp = counts[c][c]
        fp = sum(counts[r][c] for r in range(num_classes)) - tp
        fn = sum(counts[c]) - tp
        tn = total - tp - fp - fn
        precision = tp / (tp + fp) if tp + fp else 0.0
        recall = tp / (tp + fn) if tp + fn else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
        row = {"precision": precision, "recall": recall, "f1": f1, "ovr_accuracy": (tp + tn) / total}
        per_class.append(row)
        if tp + fn or tp + fp:
            included.append(row)
    macro = {m: sum(r[m] for r in included) / len(included) for m in ("precision", "recall", "f1", "ovr_accuracy")}
    accuracy = sum(counts[c][c] for c in range(num_classes)) / total
    return counts, per_class, macro, accuracy


# ============================================================================
# Confusión y métricas
# ============================================================================

def test_perfect_predictions_are_diagonal():
    cm = confusion([0, 1, 2, 2], [0, 1, 2, 2], 3)
    np.testing.assert_array_equal(cm.counts, np.diag([1, 1, 2]))


def test_swapped_predictions_are_anti_diagonal():
    cm = confusion([0, 1], [1, 0], 2)
    np.testing.assert_array_equal(cm.counts, [[0, 1], [1, 0]])


def test_label_out_of_range():
    with pytest.raises(LabelError):
        confusion([0, 3], [0, 1], 3)


def test_binary_example():
    cm = ConfusionMatrix(np.array([[9, 1], [1, 89]]))
    summary = metrics(cm)
    positive = summary.for_class(0)
    assert positive.precision == pytest.approx(0.9)
    assert positive.recall == pytest.approx(0.9)
    assert positive.f1 == pytest.approx(0.9)
    assert summary.accuracy == pytest.approx(0.98)


def test_binary_macro_accuracy_is_eq_accuracy_formula():
    tp, fn, fp, tn = 13, 4, 6, 77
    summary = metrics(ConfusionMatrix(np.array([[tp, fn], [fp, tn]])))
    assert summary.macro["ovr_accuracy"] == (tp + tn) / (tp + tn + fp + fn)


def test_diagonal_matrix_scores_one():
    summary = metrics(ConfusionMatrix(np.diag([3, 4, 5])))
    assert summary.accuracy == 1.0
    assert summary.macro == {"precision": 1.0, "recall": 1.0, "f1": 1.0, "ovr_accuracy": 1.0}


def test_absent_class_flagged_and_excluded():
    summary = metrics(confusion([0, 1, 1], [0, 1, 0], 3))
    absent = summary.for_class(2)
    assert absent.precision_undefined and absent.recall_undefined
    assert absent.precision == 0.0 and absent.recall == 0.0
    assert summary.excluded == [2]
    assert summary.macro["recall"] == (1.0 + 0.5) / 2


def test_empty_matrix():
    with pytest.raises(ContractViolation):
        metrics(ConfusionMatrix(np.zeros((2, 2), dtype=np.int64)))


def test_matches_brute_force_on_random_labels(rng):
    for _ in range(1000):
        num_classes = int(rng.integers(2, 6))
        n = int(rng.integers(1, 40))
        true = rng.integers(num_classes, size=n).tolist()
        pred = rng.integers(num_classes, size=n).tolist()
        counts, per_class, macro, accuracy = brute_force_metrics(true, pred, num_classes)
        cm = confusion(true, pred, num_classes)
        summary = metrics(cm)
        assert cm.counts.tolist() == counts
        assert summary.accuracy == accuracy
        assert summary.macro == macro
        for got, want in zip(summary.per_class, per_class):
            assert {m: got.value(m) for m in want} == want


def test_held_in_macro_uses_subset():
    summary = metrics(confusion([0, 1, 2, 2], [0, 1, 0, 2], 3), held_in=[0, 1])
    assert summary.held_in["recall"] == 1.0
    assert summary.macro["recall"] < 1.0


def test_held_in_accuracy_counts_correct_queries():
    # 0 y 1 vistas; 2 de 4 consultas vistas aciertan, la clase 2 acierta siempre
    true = [0, 0, 1, 1, 2, 2, 2, 2]
    pred = [0, 1, 0, 1, 2, 2, 2, 2]
    summary = metrics(confusion(true, pred, 3), held_in=[0, 1])
    assert summary.held_in_accuracy == 0.5
    assert summary.held_in["recall"] == 0.5
    assert summary.held_in["ovr_accuracy"] > summary.held_in_accuracy


def test_random_guessing_keeps_held_in_accuracy_low():
    gen = np.random.default_rng(5)
    true = np.repeat(np.arange(5), 200)
    pred = gen.integers(5, size=true.size)
    summary = metrics(confusion(true, pred, 5), held_in=[0, 1, 2, 3])
    assert summary.held_in_accuracy < 0.3
    assert summary.held_in["ovr_accuracy"] > 0.6


def test_held_in_report_cell_is_query_accuracy(cluster_embeddings):
    vectors, labels = cluster_embeddings
    report = k_sweep(vectors, labels, [1], repeats=2, rng_seed=0, held_in=[0, 1, 2])[0]
    run = report.runs[0]
    assert summary_value(run, "accuracy", "held-in") == run.held_in_accuracy
    assert summary_value(run, "accuracy", "0") is None
    assert summary_value(run, "accuracy", "macro") is None
    assert summary_value(run, "ovr_accuracy", "0") == run.for_class(0).ovr_accuracy


# ============================================================================
# Barrido de k
# ============================================================================

def test_mean_std_identical_values():
    stat = mean_std([0.1, 0.1, 0.1])
    assert stat.mean == 0.1 and stat.std == 0.0


def test_mean_std_sample_deviation():
    stat = mean_std([1.0, 2.0, 3.0])
    assert stat.mean == 2.0
    assert stat.std == pytest.approx(1.0)


def test_sweep_emits_one_report_per_k(cluster_embeddings):
    vectors, labels = cluster_embeddings
    reports = k_sweep(vectors, labels, [1, 3, 5, 7, 9], repeats=2, rng_seed=3)
    assert [r.k for r in reports] == [1, 3, 5, 7, 9]


def test_separated_clusters_are_perfect(cluster_embeddings):
    vectors, labels = cluster_embeddings
    for report in k_sweep(vectors, labels, [1, 3, 5], repeats=3, rng_seed=1):
        acc = report.stat("accuracy", "all")
        assert (acc.mean, acc.std) == (1.0, 0.0)


def test_single_repeat_has_zero_std(rng):
    labels = np.repeat(np.arange(3), 5)
    vectors = rng.normal(size=(15, 6))
    report = k_sweep(vectors, labels, [2], repeats=1, rng_seed=4)[0]
    assert all(std == 0.0 for *_, std in report.summary_rows())


def test_sweep_is_reproducible(rng):
    labels = np.repeat(np.arange(3), 8)
    vectors = rng.normal(size=(24, 6))
    a = k_sweep(vectors, labels, [1, 3], repeats=4, rng_seed=21)
    b = k_sweep(vectors, labels, [1, 3], repeats=4, rng_seed=21)
    assert [r.rows() for r in a] == [r.rows() for r in b]


def test_parallel_sweep_matches_serial(rng):
    labels = np.repeat(np.arange(3), 8)
    vectors = rng.normal(size=(24, 6))
    serial = k_sweep(vectors, labels, [1, 3], repeats=4, rng_seed=21)
    parallel = k_sweep(vectors, labels, [1, 3], repeats=4, rng_seed=21, workers=4)
    assert [r.rows() for r in serial] == [r.rows() for r in parallel]


def test_sweep_class_too_small(cluster_embeddings):
    vectors, labels = cluster_embeddings
    with pytest.raises(SupportError):
        k_sweep(vectors, labels, [1, 12], repeats=1, rng_seed=0)


# ============================================================================
# Clase no vista
# ============================================================================

def five_class_clusters():
    gen = np.random.default_rng(2)
    labels = np.repeat(np.arange(5), 10)
    centers = np.eye(5, 16) * 50.0
    return centers[labels] + gen.normal(0.0, 0.3, size=(50, 16)), labels


def test_unseen_report_has_five_class_rows():
    vectors, labels = five_class_clusters()
    report = unseen_class_report(vectors, labels, k=7, rng_seed=0, repeats=2, unseen_class=4,
                                 train_classes=[0, 1, 2, 3])
    assert report.class_ids == [0, 1, 2, 3, 4]
    assert report.unseen_class == 4
    assert report.held_in == [0, 1, 2, 3]
    assert report.stat("recall", "4").mean == 1.0
    table = format_per_class(report)
    assert "4*" in table
    assert len([line for line in table.splitlines() if line.split()[0] in {"0", "1", "2", "3", "4*"}]) == 5


def test_unseen_class_in_training_is_protocol_error():
    vectors, labels = five_class_clusters()
    with pytest.raises(ProtocolError):
        unseen_class_report(vectors, labels, 3, 0, train_classes=[0, 1, 2, 3, 4])


def test_unseen_class_missing_from_pool():
    vectors, labels = five_class_clusters()
    keep = labels != 4
    with pytest.raises(ProtocolError):
        unseen_class_report(vectors[keep], labels[keep], 3, 0)


# ============================================================================
# Informes
# ============================================================================

def test_report_csvs(tmp_path, cluster_embeddings):
    vectors, labels = cluster_embeddings
    reports = k_sweep(vectors, labels, [1, 3], repeats=5, rng_seed=0)
    path, summary = write_report(reports, tmp_path / "sweep.csv")
    rows = pd.read_csv(path)
    assert list(rows.columns) == REPORT_COLUMNS
    per_metric = rows[(rows["k"] == 3) & (rows["metric"] == "precision") & (rows["class"] == "macro")]
    assert sorted(per_metric["repeat"]) == [1, 2, 3, 4, 5]
    assert list(pd.read_csv(summary).columns) == SUMMARY_COLUMNS


def test_k_table_layout(cluster_embeddings):
    vectors, labels = cluster_embeddings
    table = format_k_table(k_sweep(vectors, labels, [1, 3], repeats=2, rng_seed=0))
    lines = table.splitlines()
    assert "k = 1" in lines[0] and "k = 3" in lines[0]
    assert any(line.startswith("Accuracy") and "1.000 ± 0.000" in line for line in lines)


def test_comparison_layout():
    table = format_comparison({
        "Siamese-AlexNet": {"accuracy": 0.9, "precision": 0.8, "recall": 0.7, "f1": 0.75},
        "Classifier": {"accuracy": 0.6, "precision": 0.5, "recall": 0.4, "f1": 0.45},
    })
    header = table.splitlines()[0].split()
    assert header == ["Model", "Accuracy", "Precision", "Recall", "F-score"]
    assert "0.750" in table


def test_unseen_eval_from_checkpoint(small_generated):
    from modules.datagen import load_dataset
    from modules.net import Checkpoint, build

    checkpoint = Checkpoint.from_net(build("alex-lite", 1, embedding_dim=8), {"train_classes": [0, 1, 2, 3]})
    report = unseen_class_eval(checkpoint, load_dataset(small_generated), k=1, rng_seed=0, repeats=2)
    assert report.class_ids == [0, 1, 2, 3, 4]
    assert len(report.runs) == 2


def test_unseen_eval_rejects_checkpoint_trained_on_it(small_generated):
    from modules.datagen import load_dataset
    from modules.net import Checkpoint, build

    checkpoint = Checkpoint.from_net(build("alex-lite", 1, embedding_dim=8), {"train_classes": [0, 1, 2, 3, 4]})
    with pytest.raises(ProtocolError):
        unseen_class_eval(checkpoint, load_dataset(small_generated), k=1, rng_seed=0)
