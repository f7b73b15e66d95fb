"""Seeded synthetic dataset generation.

Produces schema-valid posts, relations, and a grid street network from the
counter-based generator in `rng`, so any slice of the dataset is a pure
function of (seed, field, element index). File writers here emit the exact
formats `ingest` reads.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass

import numpy as np

from .records import (
    HA_CLASSES,
    HV_CLASSES,
    SCENE_ATTR_DIM,
    SCENE_DIM,
    TEXT_HIDDEN_DIM,
    VIS_HIDDEN_DIM,
    DataError,
    PostRecord,
    SpatialNetwork,
    UserRelations,
    build_spatial_network,
    build_user_relations,
    week_ordinal,
)
from .rng import CounterRng

METERS_PER_DEG_LAT = 111_320.0
DEFAULT_WEEK0 = week_ordinal(2019, 1)

PAYLOAD_FULL = "full"
PAYLOAD_CONTEXTUAL = "contextual"  # shared constant payload vectors, graph fields random


@dataclass
class SynthConfig:
    k: int = 100
    users: int = 30
    weeks: int = 20
    week0: int = DEFAULT_WEEK0
    groups: int = 12
    grid: int = 6
    seed: int = 42
    no_text_frac: float = 0.3
    face_frac: float = 0.35
    contacts_per_user: float = 1.5
    groups_per_user: float = 2.0
    dirichlet_alpha: float = 0.3
    annotator_mix: float = 0.7  # convex pull of annotator b toward annotator a
    origin_lat: float = 52.35
    origin_lon: float = 4.85
    spacing_m: float = 150.0
    speed_m_per_min: float = 80.0
    payload: str = PAYLOAD_FULL

    def __post_init__(self) -> None:
        if self.k <= 0:
            raise DataError("synthetic K must be positive")
        if self.users <= 0 or self.weeks <= 0 or self.grid < 2 or self.groups < 0:
            raise DataError("synthetic shape parameters out of range")
        for name, val in (
            ("no_text_frac", self.no_text_frac),
            ("face_frac", self.face_frac),
            ("annotator_mix", self.annotator_mix),
        ):
            if not (0.0 <= val <= 1.0):
                raise DataError(f"synthetic {name} must be in [0, 1]")
        if self.payload not in (PAYLOAD_FULL, PAYLOAD_CONTEXTUAL):
            raise DataError(f"unknown payload profile {self.payload}")


def _user_ids(n: int) -> list[str]:
    width = max(4, len(str(n - 1)))
    return [f"u{j:0{width}d}" for j in range(n)]


def _post_ids(k: int) -> list[str]:
    width = max(6, len(str(k - 1)))
    return [f"p{i:0{width}d}" for i in range(k)]


def make_network(cfg: SynthConfig) -> SpatialNetwork:
    """Square grid of streets; travel time = edge length / walking speed."""
    g = cfg.grid
    dlat = cfg.spacing_m / METERS_PER_DEG_LAT
    dlon = cfg.spacing_m / (METERS_PER_DEG_LAT * math.cos(math.radians(cfg.origin_lat)))
    nodes = []
    for r in range(g):
        for c in range(g):
            nodes.append((f"v{r:03d}_{c:03d}", cfg.origin_lat + r * dlat, cfg.origin_lon + c * dlon))
    name = {(r, c): f"v{r:03d}_{c:03d}" for r in range(g) for c in range(g)}
    travel = cfg.spacing_m / cfg.speed_m_per_min
    edges = []
    for r in range(g):
        for c in range(g):
            if c + 1 < g:
                edges.append((name[r, c], name[r, c + 1], travel))
            if r + 1 < g:
                edges.append((name[r, c], name[r + 1, c], travel))
    return build_spatial_network(nodes, edges)


def make_relations(cfg: SynthConfig) -> UserRelations:
    rng = CounterRng(cfg.seed)
    users = _user_ids(cfg.users)

    n_pairs = int(round(cfg.users * cfg.contacts_per_user / 2.0))
    a = rng.integers("contact_a", n_pairs, cfg.users)
    b = rng.integers("contact_b", n_pairs, cfg.users)
    contacts = sorted(
        {
            (users[min(i, j)], users[max(i, j)])
            for i, j in zip(a.tolist(), b.tolist())
            if i != j
        }
    )

    groups: dict[str, list[str]] = {}
    if cfg.groups > 0:
        p = min(1.0, cfg.groups_per_user / cfg.groups)
        u = rng.uniforms("groups", cfg.users * cfg.groups).reshape(cfg.users, cfg.groups)
        member = u < p
        for j in range(cfg.users):
            gs = [f"g{x:03d}" for x in np.flatnonzero(member[j])]
            if gs:
                groups[users[j]] = gs
    return build_user_relations(users, contacts, groups)


def _mix_pair(a: np.ndarray, raw_b: np.ndarray, mix: float) -> np.ndarray:
    # convex combination of two simplexes is a simplex
    return mix * a + (1.0 - mix) * raw_b


def generate_synthetic(
    cfg: SynthConfig,
) -> tuple[list[PostRecord], UserRelations, SpatialNetwork]:
    """Build the whole dataset in memory."""
    rng = CounterRng(cfg.seed)
    k = cfg.k
    post_ids = _post_ids(k)
    relations = make_relations(cfg)
    network = make_network(cfg)
    users = relations.users

    user_of = rng.integers("post_user", k, cfg.users)
    week_of = cfg.week0 + rng.integers("post_week", k, cfg.weeks)
    g = cfg.grid
    dlat = cfg.spacing_m / METERS_PER_DEG_LAT
    dlon = cfg.spacing_m / (METERS_PER_DEG_LAT * math.cos(math.radians(cfg.origin_lat)))
    lat = cfg.origin_lat + rng.uniforms("lat", k) * (g - 1) * dlat
    lon = cfg.origin_lon + rng.uniforms("lon", k) * (g - 1) * dlon

    n_restrict = int(round(k * cfg.no_text_frac))
    no_text = np.zeros(k, dtype=bool)
    no_text[rng.permutation("no_text_perm", k)[:n_restrict]] = True

    n_face = int(round(k * cfg.face_frac))
    has_face = np.zeros(k, dtype=bool)
    has_face[rng.permutation("face_perm", k)[:n_face]] = True
    face_count = 1 + rng.integers("face_count", k, 3)
    face_conf = 0.5 + 0.5 * rng.uniforms("face_conf", k)
    face_area = 0.3 * rng.uniforms("face_area", k)

    contextual = cfg.payload == PAYLOAD_CONTEXTUAL
    if contextual:
        shared_vis = np.zeros(VIS_HIDDEN_DIM)
        shared_scene = np.full(SCENE_DIM, 1.0 / SCENE_DIM)
        shared_attr = np.full(SCENE_ATTR_DIM, 1.0 / SCENE_ATTR_DIM)
        shared_ha = np.zeros(HA_CLASSES)
        shared_ha[0] = 1.0
        for arr in (shared_vis, shared_scene, shared_attr, shared_ha):
            arr.flags.writeable = False
        no_text = np.ones(k, dtype=bool)
        has_face = np.zeros(k, dtype=bool)
    else:
        vis = rng.normals("vis", k * VIS_HIDDEN_DIM).reshape(k, VIS_HIDDEN_DIM)
        scene = rng.dirichlet("scene", k, SCENE_DIM, cfg.dirichlet_alpha)
        attr = rng.dirichlet("attr", k, SCENE_ATTR_DIM, cfg.dirichlet_alpha)
        ha_a = rng.dirichlet("ha_a", k, HA_CLASSES, cfg.dirichlet_alpha)
        ha_b = _mix_pair(ha_a, rng.dirichlet("ha_b", k, HA_CLASSES, cfg.dirichlet_alpha), cfg.annotator_mix)
        hv_a = rng.dirichlet("hv_a", k, HV_CLASSES, cfg.dirichlet_alpha)
        hv_b = _mix_pair(hv_a, rng.dirichlet("hv_b", k, HV_CLASSES, cfg.dirichlet_alpha), cfg.annotator_mix)
        text = rng.normals("text", k * TEXT_HIDDEN_DIM).reshape(k, TEXT_HIDDEN_DIM)
        n_sent = 1 + rng.integers("n_sent", k, 3)
        sent_lang = rng.uniforms("sent_lang", k * 3).reshape(k, 3)
        for arr in (vis, scene, attr, ha_a, ha_b, hv_a, hv_b, text):
            arr.flags.writeable = False

    records: list[PostRecord] = []
    for i in range(k):
        texty = not no_text[i]
        if texty:
            flags = [0, 0, 0]
            for s in range(int(n_sent[i])):
                u = sent_lang[i, s]
                flags[0 if u < 0.4 else (1 if u < 0.8 else 2)] = 1
            lang_flags = tuple(flags)
        else:
            lang_flags = (0, 0, 0)
        if has_face[i]:
            face_vec = (int(face_count[i]), float(face_conf[i]), float(face_area[i]))
        else:
            face_vec = (0, 0.0, 0.0)
        if contextual:
            rec = PostRecord(
                post_id=post_ids[i],
                user_id=users[int(user_of[i])],
                week_index=int(week_of[i]),
                geo=(float(lat[i]), float(lon[i])),
                has_text=False,
                lang_flags=(0, 0, 0),
                face_vec=(0, 0.0, 0.0),
                vis_hidden=shared_vis,
                scene_logits=shared_scene,
                scene_attr_logits=shared_attr,
                text_hidden=None,
                hv_logits_a=None,
                hv_logits_b=None,
                ha_logits_a=shared_ha,
                ha_logits_b=shared_ha,
            )
        else:
            rec = PostRecord(
                post_id=post_ids[i],
                user_id=users[int(user_of[i])],
                week_index=int(week_of[i]),
                geo=(float(lat[i]), float(lon[i])),
                has_text=texty,
                lang_flags=lang_flags,
                face_vec=face_vec,
                vis_hidden=vis[i],
                scene_logits=scene[i],
                scene_attr_logits=attr[i],
                text_hidden=text[i] if texty else None,
                hv_logits_a=hv_a[i] if texty else None,
                hv_logits_b=hv_b[i] if texty else None,
                ha_logits_a=ha_a[i],
                ha_logits_b=ha_b[i],
            )
        records.append(rec)
    return records, relations, network


def _post_json(rec: PostRecord) -> str:
    def vec(v):
        return None if v is None else np.asarray(v, dtype=np.float64).tolist()

    obj = {
        "post_id": rec.post_id,
        "user_id": rec.user_id,
        "week_index": rec.week_index,
        "geo": [rec.geo[0], rec.geo[1]],
        "has_text": rec.has_text,
        "lang_flags": list(rec.lang_flags),
        "face_vec": [rec.face_vec[0], rec.face_vec[1], rec.face_vec[2]],
        "vis_hidden": vec(rec.vis_hidden),
        "scene_logits": vec(rec.scene_logits),
        "scene_attr_logits": vec(rec.scene_attr_logits),
        "text_hidden": vec(rec.text_hidden),
        "hv_logits_a": vec(rec.hv_logits_a),
        "hv_logits_b": vec(rec.hv_logits_b),
        "ha_logits_a": vec(rec.ha_logits_a),
        "ha_logits_b": vec(rec.ha_logits_b),
    }
    return json.dumps(obj, separators=(",", ":"))


def write_posts_file(path: str, records: list[PostRecord]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        for rec in records:
            fh.write(_post_json(rec) + "\n")


def write_relations_file(path: str, relations: UserRelations) -> None:
    obj = {
        "users": list(relations.users),
        "contacts": [list(p) for p in sorted(relations.contacts)],
        "groups": {u: sorted(relations.groups[u]) for u in sorted(relations.groups)},
    }
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(json.dumps(obj, indent=2) + "\n")


def write_network_file(path: str, network: SpatialNetwork) -> None:
    lines = ["node_id,lat,lon"]
    lats = network.lat.tolist()
    lons = network.lon.tolist()
    for i, nid in enumerate(network.node_ids):
        lines.append(f"{nid},{lats[i]!r},{lons[i]!r}")
    lines.append("")
    lines.append("src,dst,travel_min")
    for s, d, t in zip(
        network.edge_src.tolist(), network.edge_dst.tolist(), network.travel_min.tolist()
    ):
        lines.append(f"{network.node_ids[s]},{network.node_ids[d]},{t!r}")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


def write_synthetic(cfg: SynthConfig, out_dir: str) -> dict[str, str]:
    """Generate and write posts/relations/network files; returns their paths."""
    os.makedirs(out_dir, exist_ok=True)
    records, relations, network = generate_synthetic(cfg)
    paths = {
        "posts": os.path.join(out_dir, "posts.ndjson"),
        "relations": os.path.join(out_dir, "relations.json"),
        "network": os.path.join(out_dir, "network.csv"),
    }
    write_posts_file(paths["posts"], records)
    write_relations_file(paths["relations"], relations)
    write_network_file(paths["network"], network)
    return paths
