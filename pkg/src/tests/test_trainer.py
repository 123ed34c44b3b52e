import math

import numpy as np
import pytest

from core.errors import ConfigError, DimensionError
from core.tensor import Tensor
from modules.datagen import Dataset
from modules.net import build, encode_checkpoint
from modules.trainer import (
    AugmentDraw, SGDMomentum, TrainConfig, apply_augmentation, augment, center_crop, preprocess, rot90,
    sgd_momentum_step,
    train, train_classifier, predict_classes,
)


def quick_config(**overrides):
    values = dict(preset="alex-lite", epochs=1, batch_size=4, learning_rate=0.001, rng_seed=11,
                  embedding_dim=16)
    values.update(overrides)
    return TrainConfig.create(**values)


# ============================================================================
# Optimizador
# ============================================================================

def test_sgd_two_steps():
    p, v = [np.zeros(1)], [np.zeros(1)]
    p, v = sgd_momentum_step(p, [np.ones(1)], v, lr=0.1, momentum=0.9)
    np.testing.assert_allclose(p[0], [-0.1])
    p, v = sgd_momentum_step(p, [np.ones(1)], v, lr=0.1, momentum=0.9)
    np.testing.assert_allclose(v[0], [1.9])
    np.testing.assert_allclose(p[0], [-0.29])


def test_sgd_zero_lr_keeps_params():
    p = [np.array([1.5, -2.0])]
    new_p, _ = sgd_momentum_step(p, [np.array([3.0, 4.0])], [np.zeros(2)], lr=0.0, momentum=0.9)
    np.testing.assert_array_equal(new_p[0], p[0])


def test_sgd_shape_mismatch():
    with pytest.raises(DimensionError):
        sgd_momentum_step([np.zeros(2)], [np.zeros(3)], [np.zeros(2)], 0.1, 0.9)


def test_optimizer_updates_tensors_in_place():
    t = Tensor(np.ones(2), requires_grad=True)
    t.grad = np.array([1.0, -1.0])
    opt = SGDMomentum([t], lr=0.5, momentum=0.0)
    opt.step()
    opt.zero_grad()
    np.testing.assert_allclose(t.data, [0.5, 1.5])
    assert t.grad is None or not t.grad.any()


# ============================================================================
# Aumentación y preprocesado
# ============================================================================

def test_rot90_permutes_marker():
    marker = np.array([[[1.0, 2.0], [3.0, 4.0]]])
    np.testing.assert_array_equal(rot90(marker, 1)[0], [[2.0, 4.0], [1.0, 3.0]])


def test_identity_draw_is_noop(rng):
    image = rng.uniform(size=(3, 8, 8))
    np.testing.assert_array_equal(apply_augmentation(image, AugmentDraw()), image)


def test_flips_preserve_pixel_multiset(rng):
    image = rng.uniform(size=(3, 8, 8))
    out = apply_augmentation(image, AugmentDraw(hflip=True, vflip=True, quarter_turns=3))
    assert out.shape == image.shape
    np.testing.assert_array_equal(np.sort(out.reshape(-1)), np.sort(image.reshape(-1)))


@pytest.mark.parametrize("draw", [AugmentDraw(hflip=True), AugmentDraw(vflip=True), AugmentDraw(quarter_turns=2)])
def test_self_inverse_augmentations(rng, draw):
    image = rng.uniform(size=(3, 8, 8))
    np.testing.assert_array_equal(apply_augmentation(apply_augmentation(image, draw), draw), image)


def test_arbitrary_rotation_keeps_shape(rng):
    image = rng.uniform(size=(3, 16, 16))
    out = augment(image, np.random.default_rng(0), rotation="arbitrary")
    assert out.shape == image.shape
    assert out.min() >= 0.0


def test_augment_rejects_non_square():
    with pytest.raises(DimensionError):
        apply_augmentation(np.zeros((3, 8, 9)), AugmentDraw())


def test_preprocess_constant_frame():
    out = preprocess(np.full((3, 576, 576), 0.3))
    assert out.shape == (3, 224, 224)
    np.testing.assert_allclose(out, 0.3, atol=1e-6)


def test_preprocess_crops_black_border():
    frame = np.zeros((3, 576, 576))
    frame[:, 38:538, 38:538] = 1.0
    assert preprocess(frame).min() > 0.99


def test_preprocess_scales_8bit_values():
    out = preprocess(np.full((3, 500, 500), 255.0))
    np.testing.assert_allclose(out, 1.0, atol=1e-6)


def test_preprocess_keeps_checkerboard_mean():
    rows, cols = np.indices((576, 576)) // 16
    frame = np.broadcast_to(((rows + cols) % 2).astype(np.float64), (3, 576, 576))
    expected = center_crop(frame).mean()
    assert abs(preprocess(frame).mean() - expected) < 0.01 * expected


def test_preprocess_undersized_frame():
    with pytest.raises(DimensionError):
        preprocess(np.zeros((3, 400, 400)))


# ============================================================================
# Configuración
# ============================================================================

@pytest.mark.parametrize("overrides", [
    {"learning_rate": -0.1}, {"momentum": 1.0}, {"epochs": 0}, {"batch_size": 0}, {"workers": 0},
    {"mining": "hard"}, {"rotation": "free"}, {"preset": "lenet"}, {"margin": -1.0},
])
def test_invalid_train_config(overrides):
    with pytest.raises(ConfigError):
        quick_config(**overrides)


# ============================================================================
# Entrenamiento
# ============================================================================

def test_train_log_has_one_row_per_epoch(tiny_dataset):
    checkpoint, log = train(tiny_dataset, quick_config(epochs=2))
    assert [e.epoch for e in log.epochs] == [1, 2]
    assert all(math.isfinite(l) and l >= 0 for l in log.losses)
    assert checkpoint.metadata["epochs"] == 2
    assert checkpoint.train_classes == [0, 1, 2]


def test_zero_learning_rate_keeps_initialisation(tiny_dataset):
    checkpoint, _ = train(tiny_dataset, quick_config(learning_rate=0.0))
    fresh = build("alex-lite", 11, embedding_dim=16)
    for path, tensor in fresh.params.items():
        assert checkpoint.params[path].tobytes() == tensor.data.tobytes()


def test_training_is_deterministic(tiny_dataset):
    first, log_a = train(tiny_dataset, quick_config(mining="semi-hard"))
    second, log_b = train(tiny_dataset, quick_config(mining="semi-hard"))
    assert encode_checkpoint(first) == encode_checkpoint(second)
    assert log_a.losses == log_b.losses


def test_data_parallel_matches_serial(tiny_dataset):
    serial, log_s = train(tiny_dataset, quick_config(batch_size=6, workers=1))
    parallel, log_p = train(tiny_dataset, quick_config(batch_size=6, workers=3))
    np.testing.assert_allclose(log_p.losses, log_s.losses, rtol=1e-10, atol=1e-12)
    for path in serial.params:
        np.testing.assert_allclose(parallel.params[path], serial.params[path], rtol=1e-9, atol=1e-12)


def test_triplet_training_needs_two_classes(tiny_dataset):
    one_class = tiny_dataset.subset(classes=[0])
    with pytest.raises(ConfigError):
        train(one_class, quick_config())


def test_images_too_small_rejected():
    data = Dataset(np.zeros((4, 3, 16, 16)), np.array([0, 0, 1, 1]), np.array(["train"] * 4, dtype=object))
    with pytest.raises(ConfigError):
        train(data, quick_config())


def test_classifier_untrained_loss_is_log_c(tiny_dataset):
    _, log = train_classifier(tiny_dataset, quick_config(mode="classifier", learning_rate=0.0, augment=False))
    assert log.losses[0] == pytest.approx(math.log(3), abs=1e-12)


def test_classifier_checkpoint_metadata(tiny_dataset):
    checkpoint, _ = train(tiny_dataset, quick_config(mode="classifier"))
    assert checkpoint.metadata["mode"] == "classifier"
    assert checkpoint.metadata["num_classes"] == 3
    net = checkpoint.to_net()
    predictions = predict_classes(net, tiny_dataset.images[:4])
    assert predictions.shape == (4,)
    assert set(predictions.tolist()) <= {0, 1, 2}


def test_classifier_requires_contiguous_labels(tiny_dataset):
    gap = tiny_dataset.subset(classes=[0, 2])
    with pytest.raises(ConfigError):
        train_classifier(gap, quick_config(mode="classifier"))
