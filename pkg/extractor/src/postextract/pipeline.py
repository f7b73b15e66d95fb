"""Batch assembly: raw posts plus backends in, record objects out.

Records come out in raw-post order, always, no matter how a backend
batches internally; the only posts missing from the output are those
whose image could not be decoded, each logged and reported as skipped.

Emitted objects follow the engine's posts NDJSON schema exactly: a
no-text post omits `text_hidden` and both `hv_logits` fields and carries
all-zero language flags, a zero-face post carries exact 0.0 confidence
and area, and every simplex field is normalized before serialization.
Numbers serialize through Python's shortest round-trip float formatting,
so a rerun on identical inputs reproduces identical bytes.
"""

from __future__ import annotations

import json
import logging
import os

import numpy as np

from .language import detect_language, language_flag_vector
from .rawposts import ExtractError, RawPost, week_ordinal
from .imaging import load_rgb
from .faces import face_vector
from .text import extract_text

log = logging.getLogger(__name__)


def _floats(vec: np.ndarray) -> list[float]:
    return [float(x) for x in vec]


def build_post_object(
    raw: RawPost,
    scene: np.ndarray,
    attr: np.ndarray,
    hidden: np.ndarray,
    face: tuple[int, float, float],
    text_result,
    local_lang: str,
) -> dict:
    obj = {
        "post_id": raw.post_id,
        "user_id": raw.user_id,
        "week_index": week_ordinal(raw.timestamp),
        "geo": [raw.geo[0], raw.geo[1]],
        "has_text": text_result is not None,
        "lang_flags": [0, 0, 0],
        "face_vec": [face[0], face[1], face[2]],
        "vis_hidden": _floats(hidden),
        "scene_logits": _floats(scene),
        "scene_attr_logits": _floats(attr),
    }
    if text_result is not None:
        flags = language_flag_vector(list(text_result.langs), local_lang)
        obj["lang_flags"] = list(flags)
        obj["text_hidden"] = _floats(text_result.hidden)
        obj["hv_logits_a"] = _floats(text_result.hv_a)
        obj["hv_logits_b"] = _floats(text_result.hv_b)
    return obj


def extract_posts(
    raws: list[RawPost],
    images_dir: str,
    image_size: int,
    visual,
    face_detector,
    text_encoder,
    attribute_heads,
    local_lang: str,
) -> tuple[list[dict], list[str]]:
    """Run the full extraction batch; returns (records, skipped post ids)."""
    posts: list[dict] = []
    skipped: list[str] = []
    for raw in raws:
        path = raw.image if os.path.isabs(raw.image) else os.path.join(images_dir, raw.image)
        img = load_rgb(path, image_size)
        if img is None:
            log.warning("skipping post %s: undecodable image %s", raw.post_id, path)
            skipped.append(raw.post_id)
            continue
        scene, attr, hidden = visual.encode(img)
        face = face_vector(face_detector, img)
        text_result = extract_text(text_encoder, raw.sentences, detect_language)
        obj = build_post_object(raw, scene, attr, hidden, face, text_result, local_lang)
        obj["ha_logits_a"], obj["ha_logits_b"] = (
            _floats(v) for v in attribute_heads.predict(hidden)
        )
        posts.append(obj)
    if not posts:
        raise ExtractError("every post was skipped; no records to write")
    return posts, skipped


def write_posts(path: str, posts: list[dict]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        for obj in posts:
            fh.write(json.dumps(obj, separators=(",", ":")) + "\n")
