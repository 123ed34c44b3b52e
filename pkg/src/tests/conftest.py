import numpy as np
import pytest

from core.tensor import reset_default_graph
from modules.datagen import Dataset, default_specs, generate_dataset, generate_frame
from modules.fewshot import write_embeddings


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="ejecuta los tests marcados como slow")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="necesita --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture(autouse=True)
def fresh_graph():
    reset_default_graph()
    yield
    reset_default_graph()


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def tiny_dataset():
    """3 clases x 6 fotogramas de 32px; 4 de entrenamiento y 2 de test por clase"""
    specs = default_specs()
    images, labels, splits = [], [], []
    for label in range(3):
        for j in range(6):
            images.append(generate_frame(specs[label], 32, np.random.default_rng(100 * label + j)))
            labels.append(label)
            splits.append("train" if j < 4 else "test")
    return Dataset(np.stack(images), np.array(labels), np.array(splits, dtype=object))


@pytest.fixture
def cluster_embeddings():
    """4 clases x 12 vectores de dimensión 128, clusters separados 100 unidades"""
    gen = np.random.default_rng(7)
    centers = np.zeros((4, 128))
    for c in range(4):
        centers[c, c] = 100.0
    labels = np.repeat(np.arange(4), 12)
    vectors = centers[labels] + gen.normal(0.0, 0.5, size=(labels.size, 128))
    return vectors, labels


@pytest.fixture
def cluster_store(tmp_path, cluster_embeddings):
    vectors, labels = cluster_embeddings
    ids = [f"class_{l}/frame_{i:05d}" for i, l in enumerate(labels)]
    return write_embeddings(tmp_path / "clusters.jsonl", ids, [int(l) for l in labels], vectors)


@pytest.fixture(scope="session")
def small_generated(tmp_path_factory):
    """Dataset en disco: 5 clases x 10 fotogramas de 32px con protocolo de clase no vista"""
    root = tmp_path_factory.mktemp("synthetic")
    generate_dataset(root, n_per_class=10, size=32, seed=3, unseen_protocol=True)
    return root
