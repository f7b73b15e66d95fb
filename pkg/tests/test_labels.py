"""Annotator fusion, confidence scoring, and acceptance filters."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from postweave.labels import (
    build_label_bundle,
    class_histogram,
    fuse_soft_labels,
    jaccard,
    label_confidence,
    prediction_consistency,
    topn,
)
from postweave.records import HA_CLASSES, HV_CLASSES, DataError, GraphConfig
from util import mk_post, random_simplex, simplex


def test_topn_orders_by_value_then_index():
    values, idx = topn(np.array([0.1, 0.4, 0.4, 0.1]), 2)
    assert values.tolist() == [0.4, 0.4]
    assert idx == {1, 2}
    # uniform vector: lowest indices win
    values, idx = topn(np.full(11, 1.0 / 11.0), 3)
    assert np.allclose(values, 1.0 / 11.0)
    assert idx == {0, 1, 2}
    assert abs(values.sum() - 3.0 / 11.0) < 1e-15


def test_topn_returns_exactly_n():
    values, idx = topn(np.array([0.5, 0.5, 0.0]), 1)
    assert len(values) == 1 and idx == {0}


def test_jaccard():
    assert jaccard({1, 2}, {2, 3}) == pytest.approx(1.0 / 3.0)
    assert jaccard({1}, {1}) == 1.0
    assert jaccard({1}, {2}) == 0.0
    assert jaccard(set(), {1}) == 0.0
    with pytest.raises(DataError, match="empty"):
        jaccard(set(), set())


def test_fuse_is_elementwise_mean():
    a = simplex(HA_CLASSES, 0.8, 0)
    b = simplex(HA_CLASSES, 0.8, 1)
    fused = fuse_soft_labels(a, b, HA_CLASSES)
    assert np.allclose(fused, (a + b) / 2.0)
    assert abs(fused.sum() - 1.0) < 1e-12


def test_fuse_absent_pair_gives_zeros():
    out = fuse_soft_labels(None, None, HV_CLASSES)
    assert out.shape == (HV_CLASSES,) and not out.any()
    with pytest.raises(DataError, match="both present or both absent"):
        fuse_soft_labels(simplex(HV_CLASSES), None, HV_CLASSES)


def test_confidence_is_paired_topn_mass():
    a = np.array([0.5, 0.3, 0.1, 0.05, 0.05])
    b = np.array([0.4, 0.4, 0.1, 0.05, 0.05])
    conf, agree = label_confidence(a, b, 2)
    assert conf == pytest.approx(0.5 * (0.5 + 0.3) + 0.5 * (0.4 + 0.4))
    assert agree == 1.0  # both pick {0, 1}


def test_confidence_agreement_partial_overlap():
    a = np.array([0.6, 0.2, 0.1, 0.1])
    b = np.array([0.1, 0.1, 0.2, 0.6])
    conf, agree = label_confidence(a, b, 2)
    # top-2 sets {0,1} and {3,2}: empty intersection over 4
    assert agree == 0.0
    assert conf == pytest.approx(0.5 * (0.6 + 0.2) + 0.5 * (0.6 + 0.2))


@settings(max_examples=100, deadline=None)
@given(seed=st.integers(min_value=0, max_value=2**31), n=st.integers(1, 5))
def test_confidence_bounds(seed, n):
    rng = np.random.default_rng(seed)
    a = random_simplex(rng, 9)
    b = random_simplex(rng, 9)
    conf, agree = label_confidence(a, b, n)
    assert 0.0 <= conf <= 1.0 + 1e-12
    assert 0.0 <= agree <= 1.0


# ---------------------------------------------------------------------------
# bundle-level filters


def _bundle(records, **cfg_kw):
    return build_label_bundle(records, GraphConfig(**cfg_kw))


def test_no_text_post_never_theme_labeled():
    rec = mk_post("p1", has_text=False)
    bundle = _bundle([rec])
    assert not bundle.hv_labeled[0]
    assert bundle.hv_class[0] == -1
    assert not bundle.hv_soft[:, 0].any()


def test_theme_boundary_confidence_rejected(dyadic_pair):
    # top-3 mass of the dyadic vector is exactly 0.75 in float arithmetic
    vec, partner = dyadic_pair
    conf, agree = label_confidence(vec, partner, 3)
    assert conf == 0.75 and agree == 1.0
    rec = mk_post("p1", hv_a=vec, hv_b=partner)
    bundle = _bundle([rec])
    assert not bundle.hv_labeled[0]


def test_theme_above_boundary_accepted(dyadic_pair):
    vec = np.array(dyadic_pair[0], copy=True)
    # shift a sliver of mass into the peak: conf now strictly above 0.75
    vec[0] += vec[-1]
    vec[-1] = 0.0
    rec = mk_post("p1", hv_a=vec, hv_b=vec)
    bundle = _bundle([rec])
    assert bundle.hv_labeled[0]
    assert bundle.hv_class[0] == 0


def test_theme_agreement_boundary_rejected():
    # identical confidence, top-3 sets sharing 2 of 4 distinct: jaccard 0.5 not > 0.5
    a = np.zeros(HV_CLASSES)
    a[[0, 1, 2]] = [0.5, 0.25, 0.13]
    a[3] = 1.0 - a.sum()
    b = np.zeros(HV_CLASSES)
    b[[0, 1, 3]] = [0.5, 0.25, 0.13]
    b[2] = 1.0 - b[[0, 1, 3]].sum()
    _, agree = label_confidence(a, b, 3)
    assert agree == 0.5
    rec = mk_post("p1", hv_a=a, hv_b=b)
    assert not _bundle([rec]).hv_labeled[0]


def test_activity_filter_requires_exact_top1_match():
    a = simplex(HA_CLASSES, 0.9, 2)
    b = simplex(HA_CLASSES, 0.9, 2)
    rec = mk_post("p1", ha_a=a, ha_b=b, has_text=False)
    bundle = _bundle([rec])
    assert bundle.ha_labeled[0]
    assert bundle.ha_class[0] == 2
    # same confidence but disjoint winners: agreement 0 < 1
    rec2 = mk_post("p2", ha_a=simplex(HA_CLASSES, 0.9, 2), ha_b=simplex(HA_CLASSES, 0.9, 5), has_text=False)
    assert not _bundle([rec2]).ha_labeled[0]


def test_activity_confidence_threshold():
    # peak 0.7 shared: conf = 0.7 exactly, strict > rejects
    a = simplex(HA_CLASSES, 0.7, 1)
    rec = mk_post("p1", ha_a=a, ha_b=a, has_text=False)
    assert not _bundle([rec]).ha_labeled[0]
    stronger = simplex(HA_CLASSES, 0.7 + 1e-6, 1)
    rec2 = mk_post("p2", ha_a=stronger, ha_b=stronger, has_text=False)
    assert _bundle([rec2]).ha_labeled[0]


def test_identical_annotators_always_agree():
    rng = np.random.default_rng(99)
    for _ in range(50):
        vec = random_simplex(rng, HV_CLASSES)
        _, agree = label_confidence(vec, vec, 3)
        assert agree == 1.0


def test_bundle_shapes_and_masks():
    rng = np.random.default_rng(3)
    recs = [
        mk_post(
            f"p{i}",
            has_text=bool(i % 2),
            hv_a=random_simplex(rng, HV_CLASSES) if i % 2 else None,
            hv_b=random_simplex(rng, HV_CLASSES) if i % 2 else None,
            ha_a=random_simplex(rng, HA_CLASSES),
            ha_b=random_simplex(rng, HA_CLASSES),
        )
        for i in range(8)
    ]
    bundle = _bundle(recs)
    k = len(recs)
    assert bundle.hv_soft.shape == (HV_CLASSES, k)
    assert bundle.ha_soft.shape == (HA_CLASSES, k)
    for j in range(k):
        assert bundle.hv_labeled[j] <= recs[j].has_text
        if bundle.hv_labeled[j]:
            assert bundle.hv_class[j] == int(np.argmax(bundle.hv_soft[:, j]))
        else:
            assert bundle.hv_class[j] == -1
        total = bundle.ha_soft[:, j].sum()
        assert abs(total - 1.0) < 1e-9


def test_prediction_consistency_stats():
    mean, std, count = prediction_consistency(
        [{0, 1}, {2}, None], [{1, 2}, {2}, None]
    )
    # present pairs score jaccard 1/3 and 1; the absent pair is skipped
    assert count == 2
    assert mean == pytest.approx((1.0 / 3.0 + 1.0) / 2.0)
    expected_std = float(np.std([1.0 / 3.0, 1.0]))
    assert std == pytest.approx(expected_std)
    assert prediction_consistency([], []) == (0.0, 0.0, 0)


def test_class_histogram():
    hist = class_histogram(np.array([2, 2, 0, -1, 5]), 9)
    assert hist == [1, 0, 2, 0, 0, 1, 0, 0, 0]
    assert class_histogram(np.array([-1, -1]), 3) == [0, 0, 0]
