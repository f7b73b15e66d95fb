"""Text encoders: a sentence list in, hidden vector plus annotator heads out.

The contract mirrors the visual side. `embed(text)` maps one string to a
768-dimensional vector; `heads(hidden)` applies the two value-annotator
heads and returns two 11-way simplexes. An empty sentence list never
reaches the encoder: the pipeline emits the post with all text fields
absent, which is what the record schema expects of a no-text post.

`SeededTextEncoder` is the no-weights default: a signed hashed
bag-of-words embedding (FNV-1a indexing into 768 bins) followed by two
fixed seeded linear heads. Deterministic, content-sensitive, offline.
`PretrainedTextEncoder` wraps a local transformer checkpoint with
mean-pooled last hidden states and head weights from the same directory;
it fails fast, naming the model, when the directory is absent.
"""

from __future__ import annotations

import os
import re
from dataclasses import dataclass

import numpy as np

from .rawposts import ExtractError

TEXT_HIDDEN_DIM = 768
HV_CLASSES = 11

_WORD_RE = re.compile(r"[^\W\d_]+", re.UNICODE)
_TEXT_GAIN = 8.0
_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MASK64 = (1 << 64) - 1


def _fnv1a64(token: str) -> int:
    h = _FNV_OFFSET
    for byte in token.encode("utf-8"):
        h = ((h ^ byte) * _FNV_PRIME) & _MASK64
    return h


@dataclass(frozen=True)
class TextResult:
    hidden: np.ndarray  # (768,)
    hv_a: np.ndarray  # (11,) simplex, annotator head a
    hv_b: np.ndarray  # (11,) simplex, annotator head b
    langs: tuple[str, ...]  # per-sentence codes, given or detected


class SeededTextEncoder:
    """Deterministic stand-in for the pretrained sentence encoder."""

    def __init__(self, seed: int = 70912):
        rng = np.random.Generator(np.random.Philox(seed))
        self._w_a = rng.standard_normal((HV_CLASSES, TEXT_HIDDEN_DIM))
        self._w_b = rng.standard_normal((HV_CLASSES, TEXT_HIDDEN_DIM))

    def embed(self, text: str) -> np.ndarray:
        vec = np.zeros(TEXT_HIDDEN_DIM)
        for token in _WORD_RE.findall(text.lower()):
            h = _fnv1a64(token)
            sign = 1.0 if (h >> 63) & 1 else -1.0
            vec[h % TEXT_HIDDEN_DIM] += sign
        norm = np.linalg.norm(vec)
        return vec / norm if norm > 0.0 else vec

    def heads(self, hidden: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        from .visual import softmax

        return (
            softmax(_TEXT_GAIN * (self._w_a @ hidden)),
            softmax(_TEXT_GAIN * (self._w_b @ hidden)),
        )


class PretrainedTextEncoder:
    """Local transformer checkpoint plus head weights from `heads.npz`."""

    MODEL_NAME = "sentence-bert"

    def __init__(self, model_dir: str):
        if not os.path.isdir(model_dir):
            raise FileNotFoundError(
                f"text model {self.MODEL_NAME}: missing model directory {model_dir}"
            )
        try:
            from transformers import AutoModel, AutoTokenizer
        except ImportError as exc:
            raise ExtractError(
                f"text model {self.MODEL_NAME} needs the pretrained extras: {exc}"
            ) from None
        try:
            self._tokenizer = AutoTokenizer.from_pretrained(model_dir, local_files_only=True)
            self._model = AutoModel.from_pretrained(model_dir, local_files_only=True)
            self._model.eval()
            heads = np.load(os.path.join(model_dir, "heads.npz"))
            self._w_a, self._w_b = heads["annotator_a"], heads["annotator_b"]
        except Exception as exc:  # checkpoints are user files; any failure is the same fatal
            raise ExtractError(
                f"text model {self.MODEL_NAME}: cannot load {model_dir}: {exc}"
            ) from None

    def embed(self, text: str) -> np.ndarray:
        import torch

        tokens = self._tokenizer(text, return_tensors="pt", truncation=True)
        with torch.no_grad():
            state = self._model(**tokens).last_hidden_state[0]
        return state.mean(dim=0).numpy().astype(np.float64)

    def heads(self, hidden: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        from .visual import softmax

        return softmax(self._w_a @ hidden), softmax(self._w_b @ hidden)


def extract_text(encoder, sentences, local_detect) -> TextResult | None:
    """Run one post's sentences through an encoder; None for an empty list.

    `local_detect` fills language codes the crawl did not supply. The
    paragraph-level hidden state (all sentences joined) feeds the heads;
    per-sentence outputs are the consistency study's job, not this one's.
    """
    if not sentences:
        return None
    langs = tuple(
        lang if lang is not None else local_detect(text) for text, lang in sentences
    )
    paragraph = " ".join(text for text, _ in sentences)
    hidden = encoder.embed(paragraph)
    hv_a, hv_b = encoder.heads(hidden)
    return TextResult(hidden=hidden, hv_a=hv_a, hv_b=hv_b, langs=langs)
