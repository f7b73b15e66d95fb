"""Pseudo-label fusion and confidence filtering.

Each post carries two model predictions per target (an 11-class values head
and a 9-class attributes head). The two predictions fuse by elementwise
mean; a post keeps its fused label only when the pair is both confident
(mean of top activations) and consistent (Jaccard overlap of top index
sets).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .records import HA_CLASSES, HV_CLASSES, DataError, GraphConfig, PostRecord


def topn(vec: np.ndarray, n: int) -> tuple[np.ndarray, set[int]]:
    """Top-n activation values (descending) and their index set.

    Ties resolve by value descending then index ascending, so exactly n
    indices come back.
    """
    vec = np.asarray(vec, dtype=np.float64)
    if not (1 <= n <= vec.shape[0]):
        raise DataError("top-n width out of range")
    order = np.argsort(-vec, kind="stable")[:n]
    return vec[order], set(int(i) for i in order)


def jaccard(a: set, b: set) -> float:
    """Intersection over union; undefined (error) when both sets are empty."""
    union = len(a | b)
    if union == 0:
        raise DataError("jaccard of two empty sets")
    return len(a & b) / union


def fuse_soft_labels(
    ya: np.ndarray | None, yb: np.ndarray | None, dim: int
) -> np.ndarray:
    """Elementwise mean of an annotator pair; absent pair fuses to zeros."""
    if ya is None or yb is None:
        if ya is not None or yb is not None:
            raise DataError("annotator pair must be both present or both absent")
        return np.zeros(dim, dtype=np.float64)
    ya = np.asarray(ya, dtype=np.float64)
    yb = np.asarray(yb, dtype=np.float64)
    if ya.shape != (dim,) or yb.shape != (dim,):
        raise DataError("annotator pair dimension mismatch")
    return 0.5 * (ya + yb)


def label_confidence(ya: np.ndarray, yb: np.ndarray, n: int) -> tuple[float, float]:
    """(confidence, agreement) of an annotator pair at top-n.

    Confidence is the pair-averaged mass held by each prediction's top n
    activations, summed rank by rank; agreement is the Jaccard overlap of
    the two top-n index sets.
    """
    va, sa = topn(ya, n)
    vb, sb = topn(yb, n)
    conf = 0.0
    for m in range(n):  # m-th largest of each annotator, averaged
        conf += 0.5 * (float(va[m]) + float(vb[m]))
    agree = jaccard(sa, sb)
    return conf, agree


@dataclass
class LabelBundle:
    """Fused labels, per-post confidence scores, and filter masks."""

    hv_soft: np.ndarray  # (11, K)
    ha_soft: np.ndarray  # (9, K)
    hv_conf: np.ndarray  # (K,) confidence, zero for no-text posts
    hv_agree: np.ndarray
    ha_conf: np.ndarray
    ha_agree: np.ndarray
    hv_labeled: np.ndarray  # bool masks
    ha_labeled: np.ndarray
    hv_class: np.ndarray  # argmax of fused label, -1 where unlabeled
    ha_class: np.ndarray
    hv_top_sets_a: list[set[int] | None] = field(repr=False, default_factory=list)
    hv_top_sets_b: list[set[int] | None] = field(repr=False, default_factory=list)
    ha_top_sets_a: list[set[int]] = field(repr=False, default_factory=list)
    ha_top_sets_b: list[set[int]] = field(repr=False, default_factory=list)

    @property
    def k(self) -> int:
        return self.hv_soft.shape[1]


def build_label_bundle(records: list[PostRecord], cfg: GraphConfig) -> LabelBundle:
    """Fuse annotator pairs and apply both confidence filters.

    Values labels require text (no-text posts score (0, 0) and never pass);
    attribute labels exist for every post. Filter rules: values keep posts
    with confidence > hv_conf_min and agreement > hv_agree_min, attributes
    keep confidence > ha_conf_min and agreement >= ha_agree_min.
    """
    if not records:
        raise DataError("empty dataset")
    k = len(records)
    hv_soft = np.zeros((HV_CLASSES, k), dtype=np.float64)
    ha_soft = np.zeros((HA_CLASSES, k), dtype=np.float64)
    hv_conf = np.zeros(k)
    hv_agree = np.zeros(k)
    ha_conf = np.zeros(k)
    ha_agree = np.zeros(k)
    hv_sets_a: list[set[int] | None] = []
    hv_sets_b: list[set[int] | None] = []
    ha_sets_a: list[set[int]] = []
    ha_sets_b: list[set[int]] = []

    for j, rec in enumerate(records):
        if rec.has_text:
            hv_soft[:, j] = fuse_soft_labels(rec.hv_logits_a, rec.hv_logits_b, HV_CLASSES)
            hv_conf[j], hv_agree[j] = label_confidence(
                rec.hv_logits_a, rec.hv_logits_b, cfg.hv_top_n
            )
            _, sa = topn(rec.hv_logits_a, cfg.hv_top_n)
            _, sb = topn(rec.hv_logits_b, cfg.hv_top_n)
            hv_sets_a.append(sa)
            hv_sets_b.append(sb)
        else:
            hv_sets_a.append(None)
            hv_sets_b.append(None)
        ha_soft[:, j] = fuse_soft_labels(rec.ha_logits_a, rec.ha_logits_b, HA_CLASSES)
        ha_conf[j], ha_agree[j] = label_confidence(
            rec.ha_logits_a, rec.ha_logits_b, cfg.ha_top_n
        )
        _, sa = topn(rec.ha_logits_a, cfg.ha_top_n)
        _, sb = topn(rec.ha_logits_b, cfg.ha_top_n)
        ha_sets_a.append(sa)
        ha_sets_b.append(sb)

    has_text = np.array([r.has_text for r in records], dtype=bool)
    hv_labeled = has_text & (hv_conf > cfg.hv_conf_min) & (hv_agree > cfg.hv_agree_min)
    ha_labeled = (ha_conf > cfg.ha_conf_min) & (ha_agree >= cfg.ha_agree_min)

    hv_class = np.where(hv_labeled, np.argmax(hv_soft, axis=0), -1).astype(np.int64)
    ha_class = np.where(ha_labeled, np.argmax(ha_soft, axis=0), -1).astype(np.int64)

    return LabelBundle(
        hv_soft=hv_soft,
        ha_soft=ha_soft,
        hv_conf=hv_conf,
        hv_agree=hv_agree,
        ha_conf=ha_conf,
        ha_agree=ha_agree,
        hv_labeled=hv_labeled,
        ha_labeled=ha_labeled,
        hv_class=hv_class,
        ha_class=ha_class,
        hv_top_sets_a=hv_sets_a,
        hv_top_sets_b=hv_sets_b,
        ha_top_sets_a=ha_sets_a,
        ha_top_sets_b=ha_sets_b,
    )


def prediction_consistency(
    sets_a: list[set[int] | None], sets_b: list[set[int] | None]
) -> tuple[float, float, int]:
    """Mean and population std of pairwise Jaccard overlap, skipping absents.

    Returns (mean, std, count); (0.0, 0.0, 0) when no pair is present.
    """
    vals = [
        jaccard(a, b) for a, b in zip(sets_a, sets_b) if a is not None and b is not None
    ]
    if not vals:
        return 0.0, 0.0, 0
    arr = np.array(vals, dtype=np.float64)
    return float(arr.mean()), float(arr.std()), len(vals)


def class_histogram(classes: np.ndarray, n_classes: int) -> list[int]:
    """Histogram of argmax classes over labeled posts (class -1 = unlabeled)."""
    mask = classes >= 0
    return np.bincount(classes[mask], minlength=n_classes).astype(int).tolist()
