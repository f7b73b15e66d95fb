"""Feature matrix assembly.

Posts become columns of two fixed-height matrices: a 982-row visual matrix
(hidden activations, face vector, filtered scene and scene-attribute
activations) and a 771-row textual matrix (sentence-encoder activations or
zeros, plus language flags).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .records import (
    SCENE_ATTR_DIM,
    SCENE_DIM,
    SIMPLEX_TOL,
    TEXT_HIDDEN_DIM,
    TEXTUAL_DIM,
    VIS_HIDDEN_DIM,
    VISUAL_DIM,
    DataError,
    PostRecord,
)

SCENE_TOP_N = 5
SCENE_ATTR_TOP_N = 10


@dataclass(frozen=True)
class FeatureMatrix:
    kind: str  # "visual" | "textual"
    values: np.ndarray  # (rows, K)

    @property
    def k(self) -> int:
        return self.values.shape[1]


def nhot_soft_filter(vec: np.ndarray, n: int) -> np.ndarray:
    """Keep the top-n activations, spread the residual mass over the rest.

    The input must be a probability simplex. Exactly n entries survive; ties
    at the cutoff resolve by value descending, then index ascending. The
    remaining d-n entries share (1 - sum(top n)) / (d - n) equally, so the
    output still sums to 1.
    """
    vec = np.asarray(vec, dtype=np.float64)
    if vec.ndim != 1:
        raise DataError("filter input must be a vector")
    d = vec.shape[0]
    if not (1 <= n < d):
        raise DataError("filter width out of range")
    if np.any(vec < 0.0) or abs(float(vec.sum()) - 1.0) > SIMPLEX_TOL:
        raise DataError("filter input is not a simplex")
    return _nhot_columns(vec[:, None], n)[:, 0]


def _nhot_columns(mat: np.ndarray, n: int) -> np.ndarray:
    """Column-wise n-hot soft filter over a (d, K) stack of simplexes."""
    d, k = mat.shape
    if n == d:
        return mat.astype(np.float64, copy=True)
    # stable argsort on negated values: ties keep the lower index first
    order = np.argsort(-mat, axis=0, kind="stable")
    keep = np.zeros((d, k), dtype=bool)
    keep[order[:n, :], np.arange(k)[None, :]] = True
    top_mass = np.sum(np.where(keep, mat, 0.0), axis=0)
    resid = (1.0 - top_mass) / (d - n)
    return np.where(keep, mat, resid[None, :])


def _stack(records: list[PostRecord], attr: str, dim: int, name: str) -> np.ndarray:
    cols = []
    for rec in records:
        vec = getattr(rec, attr)
        if vec is None or np.asarray(vec).shape != (dim,):
            raise DataError(f"dimension mismatch post {rec.post_id} field {name}")
        cols.append(vec)
    return np.stack(cols, axis=1).astype(np.float64)


def assemble_visual(records: list[PostRecord]) -> FeatureMatrix:
    """Stack per-post visual features into the (982, K) matrix.

    Row layout: hidden activations (512), face vector (3), filtered scene
    activations (365), filtered scene-attribute activations (102).
    """
    if not records:
        raise DataError("empty dataset")
    hidden = _stack(records, "vis_hidden", VIS_HIDDEN_DIM, "vis_hidden")
    face = np.array(
        [[float(r.face_vec[0]), r.face_vec[1], r.face_vec[2]] for r in records],
        dtype=np.float64,
    ).T
    scene = _nhot_columns(_stack(records, "scene_logits", SCENE_DIM, "scene_logits"), SCENE_TOP_N)
    attr = _nhot_columns(
        _stack(records, "scene_attr_logits", SCENE_ATTR_DIM, "scene_attr_logits"),
        SCENE_ATTR_TOP_N,
    )
    values = np.concatenate([hidden, face, scene, attr], axis=0)
    assert values.shape == (VISUAL_DIM, len(records))
    return FeatureMatrix("visual", values)


def assemble_textual(records: list[PostRecord]) -> FeatureMatrix:
    """Stack per-post textual features into the (771, K) matrix.

    Posts without text contribute a zero block for the encoder activations
    and all-zero language flags.
    """
    if not records:
        raise DataError("empty dataset")
    k = len(records)
    values = np.zeros((TEXTUAL_DIM, k), dtype=np.float64)
    for j, rec in enumerate(records):
        if rec.has_text:
            vec = rec.text_hidden
            if vec is None or np.asarray(vec).shape != (TEXT_HIDDEN_DIM,):
                raise DataError(f"dimension mismatch post {rec.post_id} field text_hidden")
            values[:TEXT_HIDDEN_DIM, j] = vec
        values[TEXT_HIDDEN_DIM:, j] = rec.lang_flags
    return FeatureMatrix("textual", values)


def language_flag_vector(sentence_langs: list[str], local_lang: str) -> tuple[int, int, int]:
    """Collapse per-sentence language codes to (English, local, other) flags."""
    en = local = other = 0
    for code in sentence_langs:
        if code == "en":
            en = 1
        elif code == local_lang:
            local = 1
        else:
            other = 1
    return en, local, other
