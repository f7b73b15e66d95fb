"""Consistency study: how stable are the predictions under input changes.

Two comparisons per post, each reported as an intersection-over-union of
top-prediction index sets:

  - scene stability: the same image encoded at the 150x150 and 320x240
    working sizes, compared on the top-5 scene classes;
  - value stability: annotator head a on the paragraph-level embedding
    versus the mean of its per-sentence outputs, compared on the top-3
    classes (text posts only).

Ties rank by lower class index (stable sort on negated scores), so the
report is deterministic. Posts whose image fails to decode contribute no
scene pair and are counted as skipped.
"""

from __future__ import annotations

import json
import os

import numpy as np

from .imaging import load_rgb
from .rawposts import RawPost
from .text import extract_text
from .language import detect_language

SCENE_TOP_N = 5
VALUE_TOP_N = 3


def top_set(vec: np.ndarray, n: int) -> frozenset[int]:
    order = np.argsort(-vec, kind="stable")
    return frozenset(int(i) for i in order[:n])


def iou(a: frozenset[int], b: frozenset[int]) -> float:
    return len(a & b) / len(a | b)


def _scene_pair_iou(path: str, visual) -> float | None:
    small = load_rgb(path, 150)
    large = load_rgb(path, 320)
    if small is None or large is None:
        return None
    scene_small, _, _ = visual.encode(small)
    scene_large, _, _ = visual.encode(large)
    return iou(top_set(scene_small, SCENE_TOP_N), top_set(scene_large, SCENE_TOP_N))


def _value_iou(raw: RawPost, text_encoder) -> float | None:
    result = extract_text(text_encoder, raw.sentences, detect_language)
    if result is None:
        return None
    per_sentence = np.mean(
        [text_encoder.heads(text_encoder.embed(text))[0] for text, _ in raw.sentences],
        axis=0,
    )
    return iou(top_set(result.hv_a, VALUE_TOP_N), top_set(per_sentence, VALUE_TOP_N))


def consistency_report(raws: list[RawPost], images_dir: str, visual, text_encoder) -> dict:
    rows: list[dict] = []
    scene_vals: list[float] = []
    value_vals: list[float] = []
    skipped = 0
    for raw in raws:
        path = raw.image if os.path.isabs(raw.image) else os.path.join(images_dir, raw.image)
        scene_iou = _scene_pair_iou(path, visual)
        value_iou = _value_iou(raw, text_encoder)
        if scene_iou is None:
            skipped += 1
        else:
            scene_vals.append(scene_iou)
        if value_iou is not None:
            value_vals.append(value_iou)
        rows.append(
            {"post_id": raw.post_id, "scene_top5_iou": scene_iou, "value_top3_iou": value_iou}
        )
    return {
        "image_size_pair": [150, 320],
        "posts": rows,
        "mean_scene_top5_iou": float(np.mean(scene_vals)) if scene_vals else None,
        "mean_value_top3_iou": float(np.mean(value_vals)) if value_vals else None,
        "counts": {
            "posts": len(raws),
            "scene_pairs": len(scene_vals),
            "text_posts": len(value_vals),
            "skipped_images": skipped,
        },
    }


def write_report(path: str, report: dict) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(json.dumps(report, indent=2) + "\n")
