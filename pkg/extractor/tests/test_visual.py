"""Visual encoder contract: shapes, normalization, determinism."""

from __future__ import annotations

import numpy as np
import pytest

from postextract.rawposts import ExtractError
from postextract.visual import (
    PretrainedVisualEncoder,
    SeededVisualEncoder,
    minshift_l1,
    softmax,
)

from fixture_data import fixture_images


def _img(name: str) -> np.ndarray:
    return np.asarray(fixture_images()[name].convert("RGB"), dtype=np.uint8)


def test_shapes_and_simplex_laws():
    enc = SeededVisualEncoder()
    for name in ("p01.png", "p08.png", "p15.png"):
        scene, attr, hidden = enc.encode(_img(name))
        assert scene.shape == (365,) and attr.shape == (102,) and hidden.shape == (512,)
        assert np.all(scene >= 0.0) and abs(scene.sum() - 1.0) <= 1e-12
        assert np.all(attr >= 0.0) and abs(attr.sum() - 1.0) <= 1e-12
        assert attr.min() == 0.0  # min-shift pins the smallest response to zero


def test_deterministic_across_instances():
    a, b = SeededVisualEncoder(), SeededVisualEncoder()
    img = _img("p13.png")
    for left, right in zip(a.encode(img), b.encode(img)):
        assert left.tobytes() == right.tobytes()


def test_constant_black_image_is_stable():
    black = np.zeros((150, 150, 3), dtype=np.uint8)
    first = SeededVisualEncoder().encode(black)
    second = SeededVisualEncoder().encode(black)
    for left, right in zip(first, second):
        assert np.array_equal(left, right)


def test_different_images_differ():
    enc = SeededVisualEncoder()
    scene_a, _, _ = enc.encode(_img("p01.png"))
    scene_b, _, _ = enc.encode(_img("p08.png"))
    assert not np.array_equal(scene_a, scene_b)


def test_softmax_and_minshift_basics():
    v = np.array([3.0, 1.0, -2.0])
    s = softmax(v)
    assert abs(s.sum() - 1.0) <= 1e-12 and s[0] > s[1] > s[2]
    m = minshift_l1(v)
    assert m[2] == 0.0 and abs(m.sum() - 1.0) <= 1e-12
    flat = minshift_l1(np.zeros(4))
    assert np.allclose(flat, 0.25)


def test_missing_pretrained_weights_is_fatal_with_model_name(tmp_path):
    missing = tmp_path / "weights.pt"
    with pytest.raises(FileNotFoundError) as err:
        PretrainedVisualEncoder(str(missing))
    assert "scene-resnet18" in str(err.value)
    assert str(missing) in str(err.value)


def test_corrupt_pretrained_weights_is_fatal_with_model_name(tmp_path):
    bogus = tmp_path / "weights.pt"
    bogus.write_bytes(b"not a checkpoint")
    with pytest.raises(ExtractError) as err:
        PretrainedVisualEncoder(str(bogus))
    assert "scene-resnet18" in str(err.value)
