from __future__ import annotations

import numpy as np
import pytest

from postweave.records import (
    build_spatial_network,
    build_user_relations,
    week_ordinal,
)
from util import mk_post, simplex

WEEK = week_ordinal(2019, 23)


@pytest.fixture
def tiny_dataset():
    """3 posts, 2 users, 4 street nodes; every layer hand-checkable.

    Temporal: p1, p2 in week W, p3 in W+1 (calendar-adjacent).
    Social: u1 owns p1, p2; u2 owns p3; u1-u2 are contacts and share one of
    three distinct groups (IoU 1/3 > beta).
    Spatial: 2x2 grid; one edge over the 20-minute cutoff.
    """
    records = [
        mk_post("p1", "u1", WEEK, geo=(52.3700, 4.8950), has_text=True),
        mk_post("p2", "u1", WEEK, geo=(52.3700, 4.8976), has_text=False),
        mk_post("p3", "u2", WEEK + 1, geo=(52.3720, 4.8950), has_text=True),
    ]
    relations = build_user_relations(
        users=["u1", "u2"],
        contacts=[("u1", "u2")],
        groups={"u1": ["g1", "g2"], "u2": ["g2", "g3"]},
    )
    network = build_spatial_network(
        nodes=[
            ("n00", 52.3700, 4.8950),
            ("n01", 52.3700, 4.8976),
            ("n10", 52.3720, 4.8950),
            ("n11", 52.3720, 4.8976),
        ],
        edges=[
            ("n00", "n01", 2.0),
            ("n00", "n10", 3.0),
            ("n01", "n11", 25.0),  # over the cutoff, must be dropped
            ("n10", "n11", 4.0),
        ],
    )
    return records, relations, network


@pytest.fixture
def dyadic_pair():
    """An annotator pair whose top-3 mass is exactly 0.75 in floats."""
    vec = np.zeros(11)
    vec[0] = 0.5
    vec[1] = 0.125
    vec[2] = 0.125
    vec[3:] = 0.03125
    assert vec.sum() == 1.0
    return vec.copy(), vec.copy()
