"""Visual encoders: one image in, three vectors out.

Every backend honors the same contract: `encode(img)` takes a HxWx3 uint8
RGB array and returns `(scene, attr, hidden)` where scene is a 365-way
simplex (softmax over scene classes), attr is a 102-way simplex, and
hidden is the raw 512-dimensional pooled activation feeding the attribute
classifiers downstream.

Attribute head responses are raw scores, not probabilities, so they are
min-shifted and L1-normalized into a simplex; that keeps the downstream
top-n mass filter's conservation contract intact.

Two backends ship. `SeededVisualEncoder` needs no weight files: it pools
the image to a 16x16 grid and pushes it through fixed random projections
drawn from a seeded counter-based generator, giving deterministic,
content-sensitive outputs with the right shapes and normalization. It is
the default and what the test suite runs. `PretrainedVisualEncoder` loads
a user-supplied checkpoint (torch format) holding a ResNet-18 backbone
plus scene and attribute linear heads; it exists for real deployments and
fails fast, naming the model, when the checkpoint is absent or unreadable.
"""

from __future__ import annotations

import os

import numpy as np
from PIL import Image

from .rawposts import ExtractError

SCENE_DIM = 365
SCENE_ATTR_DIM = 102
HIDDEN_DIM = 512

_POOL = 16  # seeded backend pools images to a 16x16 RGB grid (768 values)
_SCENE_GAIN = 6.0  # sharpens the softmax so top classes dominate


def softmax(v: np.ndarray) -> np.ndarray:
    shifted = v - v.max()
    e = np.exp(shifted)
    return e / e.sum()


def minshift_l1(v: np.ndarray) -> np.ndarray:
    """Shift to non-negative and L1-normalize; uniform if the shift is flat."""
    shifted = v - v.min()
    total = shifted.sum()
    if total <= 0.0:
        return np.full(v.shape, 1.0 / v.size)
    return shifted / total


class SeededVisualEncoder:
    """Deterministic stand-in for the pretrained scene network."""

    def __init__(self, seed: int = 70911):
        rng = np.random.Generator(np.random.Philox(seed))
        n_in = _POOL * _POOL * 3
        self._w_hidden = rng.standard_normal((HIDDEN_DIM, n_in)) / np.sqrt(n_in)
        self._w_scene = rng.standard_normal((SCENE_DIM, HIDDEN_DIM)) / np.sqrt(HIDDEN_DIM)
        self._w_attr = rng.standard_normal((SCENE_ATTR_DIM, HIDDEN_DIM)) / np.sqrt(HIDDEN_DIM)

    def encode(self, img: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        pooled = Image.fromarray(img).resize((_POOL, _POOL), Image.Resampling.BILINEAR)
        x = np.asarray(pooled, dtype=np.float64).reshape(-1) / 255.0 - 0.5
        hidden = np.tanh(self._w_hidden @ x)
        scene = softmax(_SCENE_GAIN * (self._w_scene @ hidden))
        attr = minshift_l1(self._w_attr @ hidden)
        return scene, attr, hidden


class PretrainedVisualEncoder:
    """ResNet-18 backbone plus linear heads, loaded from one checkpoint.

    Checkpoint layout: {"backbone": state_dict, "scene_head": [W, b],
    "attr_head": [W, b]} with W shaped (365, 512) and (102, 512).
    """

    MODEL_NAME = "scene-resnet18"

    def __init__(self, weights_path: str):
        if not os.path.isfile(weights_path):
            raise FileNotFoundError(
                f"visual model {self.MODEL_NAME}: missing weights file {weights_path}"
            )
        try:
            import torch
            import torchvision
        except ImportError as exc:
            raise ExtractError(
                f"visual model {self.MODEL_NAME} needs the pretrained extras: {exc}"
            ) from None
        try:
            bundle = torch.load(weights_path, map_location="cpu", weights_only=True)
            net = torchvision.models.resnet18(weights=None)
            net.fc = torch.nn.Identity()
            net.load_state_dict(bundle["backbone"])
            net.eval()
        except Exception as exc:  # checkpoints are user files; any failure is the same fatal
            raise ExtractError(
                f"visual model {self.MODEL_NAME}: cannot load {weights_path}: {exc}"
            ) from None
        self._torch = torch
        self._net = net
        self._scene_w = np.asarray(bundle["scene_head"][0], dtype=np.float64)
        self._scene_b = np.asarray(bundle["scene_head"][1], dtype=np.float64)
        self._attr_w = np.asarray(bundle["attr_head"][0], dtype=np.float64)
        self._attr_b = np.asarray(bundle["attr_head"][1], dtype=np.float64)

    def encode(self, img: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        torch = self._torch
        x = torch.from_numpy(img.astype(np.float32) / 255.0).permute(2, 0, 1)[None]
        with torch.no_grad():
            hidden = self._net(x)[0].numpy().astype(np.float64)
        scene = softmax(self._scene_w @ hidden + self._scene_b)
        attr = minshift_l1(self._attr_w @ hidden + self._attr_b)
        return scene, attr, hidden
