"""Core dataset types and their validation rules.

Every record that enters the pipeline passes through the checks here, so the
downstream math can assume well-formed inputs. Validation is total: each
invariant has its own error message, and callers can either collect all
violations (`validate_post`) or fail fast (`check_post`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from datetime import date

import numpy as np

VIS_HIDDEN_DIM = 512
SCENE_DIM = 365
SCENE_ATTR_DIM = 102
TEXT_HIDDEN_DIM = 768
HV_CLASSES = 11
HA_CLASSES = 9
VISUAL_DIM = VIS_HIDDEN_DIM + 3 + SCENE_DIM + SCENE_ATTR_DIM  # 982
TEXTUAL_DIM = TEXT_HIDDEN_DIM + 3  # 771

SIMPLEX_TOL = 1e-6


class DataError(Exception):
    """A dataset violates the schema contract (CLI exit code 1)."""


def week_ordinal(iso_year: int, iso_week: int) -> int:
    """Flatten an ISO-8601 (year, week) pair to a week ordinal.

    The ordinal counts whole weeks since the proleptic week containing
    0001-01-01 (a Monday), so calendar-consecutive weeks differ by exactly 1
    even across year boundaries.
    """
    monday = date.fromisocalendar(iso_year, iso_week, 1)
    return (monday.toordinal() - 1) // 7


def week_ordinal_to_iso(ordinal: int) -> tuple[int, int]:
    """Inverse of `week_ordinal`."""
    monday = date.fromordinal(ordinal * 7 + 1)
    year, week, _ = monday.isocalendar()
    return year, week


@dataclass(frozen=True)
class PostRecord:
    """One social-media post after upstream feature extraction."""

    post_id: str
    user_id: str
    week_index: int
    geo: tuple[float, float]  # (latitude, longitude) in degrees
    has_text: bool
    lang_flags: tuple[int, int, int]  # (English, local, other)
    face_vec: tuple[int, float, float]  # (count, confidence, area_ratio)
    vis_hidden: np.ndarray
    scene_logits: np.ndarray
    scene_attr_logits: np.ndarray
    text_hidden: np.ndarray | None
    hv_logits_a: np.ndarray | None
    hv_logits_b: np.ndarray | None
    ha_logits_a: np.ndarray
    ha_logits_b: np.ndarray


def _is_simplex(vec: np.ndarray) -> bool:
    return bool(np.all(vec >= 0.0) and abs(float(vec.sum()) - 1.0) <= SIMPLEX_TOL)


def validate_post(rec: PostRecord) -> list[str]:
    """Return every invariant violation of one post (empty list = valid)."""
    out: list[str] = []
    pid = rec.post_id

    if not rec.post_id:
        out.append("empty post_id")
    if not rec.user_id:
        out.append(f"empty user_id post {pid}")
    if not isinstance(rec.week_index, int):
        out.append(f"non-integer week_index post {pid}")

    lat, lon = rec.geo
    if not (math.isfinite(lat) and -90.0 <= lat <= 90.0):
        out.append(f"latitude out of range post {pid}")
    if not (math.isfinite(lon) and -180.0 <= lon <= 180.0):
        out.append(f"longitude out of range post {pid}")

    if any(f not in (0, 1) for f in rec.lang_flags):
        out.append(f"non-binary lang_flags post {pid}")

    count, conf, area = rec.face_vec
    if count < 0 or int(count) != count:
        out.append(f"face count not a non-negative integer post {pid}")
    if not (0.0 <= conf <= 1.0):
        out.append(f"face confidence out of unit interval post {pid}")
    if not (0.0 <= area <= 1.0):
        out.append(f"face area_ratio out of unit interval post {pid}")
    if count == 0 and (conf != 0.0 or area != 0.0):
        out.append(f"zero-face post with nonzero confidence or area post {pid}")

    def dim_check(vec: np.ndarray | None, want: int, name: str) -> None:
        if vec is not None and vec.shape != (want,):
            out.append(f"dimension mismatch post {pid} field {name}")

    def simplex_check(vec: np.ndarray | None, want: int, name: str) -> None:
        if vec is None:
            return
        if vec.shape != (want,):
            out.append(f"dimension mismatch post {pid} field {name}")
        elif not _is_simplex(vec):
            out.append(f"simplex violation post {pid} field {name}")

    dim_check(rec.vis_hidden, VIS_HIDDEN_DIM, "vis_hidden")
    simplex_check(rec.scene_logits, SCENE_DIM, "scene_logits")
    simplex_check(rec.scene_attr_logits, SCENE_ATTR_DIM, "scene_attr_logits")
    dim_check(rec.text_hidden, TEXT_HIDDEN_DIM, "text_hidden")
    simplex_check(rec.hv_logits_a, HV_CLASSES, "hv_logits_a")
    simplex_check(rec.hv_logits_b, HV_CLASSES, "hv_logits_b")
    simplex_check(rec.ha_logits_a, HA_CLASSES, "ha_logits_a")
    simplex_check(rec.ha_logits_b, HA_CLASSES, "ha_logits_b")

    if rec.has_text:
        if rec.text_hidden is None:
            out.append(f"has_text post missing text_hidden post {pid}")
        if rec.hv_logits_a is None or rec.hv_logits_b is None:
            out.append(f"has_text post missing hv logits post {pid}")
    else:
        if rec.text_hidden is not None or rec.hv_logits_a is not None or rec.hv_logits_b is not None:
            out.append(f"text fields present on no-text post {pid}")
        if rec.lang_flags != (0, 0, 0):
            out.append(f"nonzero lang_flags on no-text post {pid}")

    return out


def check_post(rec: PostRecord) -> None:
    """Raise `DataError` on the first invariant violation."""
    violations = validate_post(rec)
    if violations:
        raise DataError(violations[0])


@dataclass(frozen=True)
class UserRelations:
    """User universe with friendship pairs and group memberships."""

    users: tuple[str, ...]
    contacts: frozenset[tuple[str, str]]  # canonical (min, max) pairs
    groups: dict[str, frozenset[str]]

    def index(self) -> dict[str, int]:
        return {u: j for j, u in enumerate(self.users)}

    def groups_of(self, user: str) -> frozenset[str]:
        return self.groups.get(user, frozenset())

    def with_users_appended(self, extra: list[str]) -> "UserRelations":
        return UserRelations(self.users + tuple(extra), self.contacts, self.groups)


def build_user_relations(
    users: list[str],
    contacts: list[tuple[str, str]],
    groups: dict[str, list[str]],
) -> UserRelations:
    """Normalize and validate raw relation lists into a `UserRelations`."""
    seen = set()
    for u in users:
        if u in seen:
            raise DataError(f"duplicate user_id {u}")
        seen.add(u)
    canon: set[tuple[str, str]] = set()
    for a, b in contacts:
        if a == b:
            raise DataError(f"self-contact pair for user {a}")
        if a not in seen or b not in seen:
            missing = a if a not in seen else b
            raise DataError(f"contact references unknown user {missing}")
        canon.add((a, b) if a < b else (b, a))
    for u in groups:
        if u not in seen:
            raise DataError(f"groups entry references unknown user {u}")
    return UserRelations(
        users=tuple(users),
        contacts=frozenset(canon),
        groups={u: frozenset(g) for u, g in groups.items() if g},
    )


@dataclass(frozen=True)
class SpatialNetwork:
    """Street-intersection graph with travel-time edge weights.

    Nodes are kept sorted by node_id so index order and id order agree; edges
    are canonical (src index < dst index), deduplicated, undirected.
    """

    node_ids: tuple[str, ...]
    lat: np.ndarray
    lon: np.ndarray
    edge_src: np.ndarray  # indices into node_ids
    edge_dst: np.ndarray
    travel_min: np.ndarray

    @property
    def node_count(self) -> int:
        return len(self.node_ids)

    @property
    def edge_count(self) -> int:
        return len(self.travel_min)

    def index(self) -> dict[str, int]:
        return {n: i for i, n in enumerate(self.node_ids)}


def build_spatial_network(
    nodes: list[tuple[str, float, float]],
    edges: list[tuple[str, str, float]],
) -> SpatialNetwork:
    """Normalize node/edge lists into a `SpatialNetwork`.

    Parallel edges collapse to the minimum travel time; exact duplicates are
    dropped; self-loops and references to unknown nodes are errors.
    """
    ids = [n[0] for n in nodes]
    if len(set(ids)) != len(ids):
        dup = next(i for i in ids if ids.count(i) > 1)
        raise DataError(f"duplicate node_id {dup}")
    order = sorted(range(len(nodes)), key=lambda i: nodes[i][0])
    node_ids = tuple(nodes[i][0] for i in order)
    lat = np.array([nodes[i][1] for i in order], dtype=np.float64)
    lon = np.array([nodes[i][2] for i in order], dtype=np.float64)
    idx = {n: i for i, n in enumerate(node_ids)}

    best: dict[tuple[int, int], float] = {}
    for a, b, t in edges:
        if a not in idx or b not in idx:
            missing = a if a not in idx else b
            raise DataError(f"edge references unknown node {missing}")
        if a == b:
            raise DataError(f"self-loop edge on node {a}")
        if not (math.isfinite(t) and t >= 0.0):
            raise DataError(f"invalid travel time on edge {a},{b}")
        i, j = idx[a], idx[b]
        key = (i, j) if i < j else (j, i)
        prev = best.get(key)
        if prev is None or t < prev:
            best[key] = t

    keys = sorted(best)
    edge_src = np.array([k[0] for k in keys], dtype=np.int64)
    edge_dst = np.array([k[1] for k in keys], dtype=np.int64)
    travel = np.array([best[k] for k in keys], dtype=np.float64)
    return SpatialNetwork(node_ids, lat, lon, edge_src, edge_dst, travel)


@dataclass
class GraphConfig:
    """Weights and thresholds governing label filtering and graph layers."""

    alpha_t: float = 0.5
    alpha_u1: float = 1.0
    alpha_u2: float = 1.0
    alpha_u3: float = 1.0
    beta_u: float = 0.05
    max_travel_min: float = 20.0
    hv_top_n: int = 3
    ha_top_n: int = 1
    hv_conf_min: float = 0.75
    hv_agree_min: float = 0.5
    ha_conf_min: float = 0.7
    ha_agree_min: float = 1.0
    # replication switches
    rank_tridiagonal: bool = False  # paper-literal tridiagonal over week ranks
    spatial_unit_diagonal: bool = True

    def __post_init__(self) -> None:
        if not (0.0 <= self.alpha_t < 1.0):
            raise DataError("alpha_t must be in [0, 1)")
        if min(self.alpha_u1, self.alpha_u2, self.alpha_u3) < 0.0:
            raise DataError("alpha_u weights must be non-negative")
        if not (0.0 < self.beta_u < 1.0):
            raise DataError("beta_u must be in (0, 1)")
        if self.max_travel_min <= 0.0:
            raise DataError("max_travel_min must be positive")
        for name, val in (
            ("hv_conf_min", self.hv_conf_min),
            ("hv_agree_min", self.hv_agree_min),
            ("ha_conf_min", self.ha_conf_min),
            ("ha_agree_min", self.ha_agree_min),
        ):
            if not (0.0 <= val <= 1.0):
                raise DataError(f"{name} must be in [0, 1]")
        if not (1 <= self.hv_top_n <= HV_CLASSES):
            raise DataError("hv_top_n out of range")
        if not (1 <= self.ha_top_n <= HA_CLASSES):
            raise DataError("ha_top_n out of range")
