"""Shared helpers for the test suite.

The dense/naive reference implementations here are deliberately independent
of the production code paths: they favor clarity over speed and exist so
the sparse implementations have something honest to be checked against.
"""

from __future__ import annotations

import numpy as np

from postweave.records import (
    HA_CLASSES,
    HV_CLASSES,
    SCENE_ATTR_DIM,
    SCENE_DIM,
    TEXT_HIDDEN_DIM,
    VIS_HIDDEN_DIM,
    PostRecord,
)


def simplex(dim: int, peak: float = 0.6, peak_idx: int = 0) -> np.ndarray:
    """Deterministic simplex with one peak and uniform remainder."""
    vec = np.full(dim, (1.0 - peak) / (dim - 1))
    vec[peak_idx] = peak
    return vec


def mk_post(
    post_id: str,
    user_id: str = "u1",
    week_index: int = 104614,
    geo: tuple[float, float] = (52.3702, 4.8952),
    has_text: bool = True,
    lang_flags: tuple[int, int, int] | None = None,
    face_vec: tuple[int, float, float] = (0, 0.0, 0.0),
    scene_peak: int = 0,
    attr_peak: int = 0,
    scene: np.ndarray | None = None,
    attr: np.ndarray | None = None,
    hv_a: np.ndarray | None = None,
    hv_b: np.ndarray | None = None,
    ha_a: np.ndarray | None = None,
    ha_b: np.ndarray | None = None,
) -> PostRecord:
    """A valid PostRecord with deterministic filler vectors."""
    if lang_flags is None:
        lang_flags = (1, 0, 0) if has_text else (0, 0, 0)
    if ha_a is None:
        ha_a = simplex(HA_CLASSES, 0.8)
    if ha_b is None:
        ha_b = simplex(HA_CLASSES, 0.8)
    if has_text:
        text_hidden = np.linspace(-1.0, 1.0, TEXT_HIDDEN_DIM)
        hv_a = simplex(HV_CLASSES, 0.5) if hv_a is None else hv_a
        hv_b = simplex(HV_CLASSES, 0.5) if hv_b is None else hv_b
    else:
        text_hidden = None
        hv_a = None
        hv_b = None
    return PostRecord(
        post_id=post_id,
        user_id=user_id,
        week_index=week_index,
        geo=geo,
        has_text=has_text,
        lang_flags=lang_flags,
        face_vec=face_vec,
        vis_hidden=np.linspace(0.0, 1.0, VIS_HIDDEN_DIM),
        scene_logits=simplex(SCENE_DIM, 0.4, scene_peak) if scene is None else scene,
        scene_attr_logits=simplex(SCENE_ATTR_DIM, 0.4, attr_peak) if attr is None else attr,
        text_hidden=text_hidden,
        hv_logits_a=hv_a,
        hv_logits_b=hv_b,
        ha_logits_a=ha_a,
        ha_logits_b=ha_b,
    )


def random_simplex(rng: np.random.Generator, dim: int) -> np.ndarray:
    vec = rng.gamma(0.4, size=dim) + 1e-12
    return vec / vec.sum()


# ---------------------------------------------------------------------------
# naive reference implementations (oracles)


def dense_nhot(vec: np.ndarray, n: int) -> np.ndarray:
    """Direct transcription of the filter definition, one entry at a time."""
    d = len(vec)
    order = sorted(range(d), key=lambda i: (-vec[i], i))
    keep = set(order[:n])
    top_sum = sum(vec[i] for i in keep)
    resid = (1.0 - top_sum) / (d - n)
    return np.array([vec[i] if i in keep else resid for i in range(d)])


def dense_project(assignment: np.ndarray, kernel_dense: np.ndarray) -> np.ndarray:
    """O(K^2) projection: every post pair looks up its kernel cell."""
    k = len(assignment)
    out = np.zeros((k, k))
    for i in range(k):
        for j in range(k):
            out[i, j] = kernel_dense[assignment[i], assignment[j]]
    return out


def union_find_components(n: int, edges: list[tuple[int, int]]) -> list[set[int]]:
    """Independent union-find, returning only components with an edge."""
    parent = list(range(n))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    touched = set()
    for a, b in edges:
        if a == b:
            continue
        touched.add(a)
        touched.add(b)
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb
    comps: dict[int, set[int]] = {}
    for v in touched:
        comps.setdefault(find(v), set()).add(v)
    return list(comps.values())


def bfs_all_pairs_diameter(nodes: list[int], adj: dict[int, set[int]]) -> int:
    """All-pairs BFS hop diameter of a connected node set."""
    from collections import deque

    best = 0
    for src in nodes:
        dist = {src: 0}
        dq = deque([src])
        while dq:
            v = dq.popleft()
            for w in adj.get(v, ()):
                if w not in dist:
                    dist[w] = dist[v] + 1
                    dq.append(w)
        assert set(dist) == set(nodes), "oracle input not connected"
        best = max(best, max(dist.values()))
    return best


def haversine_reference(lat1, lon1, lat2, lon2, radius=6_371_008.8) -> float:
    """Scalar haversine written independently of the production helper."""
    import math

    p1, p2 = math.radians(lat1), math.radians(lat2)
    dphi = p2 - p1
    dlmb = math.radians(lon2 - lon1)
    a = math.sin(dphi / 2) ** 2 + math.cos(p1) * math.cos(p2) * math.sin(dlmb / 2) ** 2
    return 2 * radius * math.asin(min(1.0, math.sqrt(a)))
