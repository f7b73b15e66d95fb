"""Readers for the three input formats.

Posts arrive as NDJSON (one object per post, field names matching
PostRecord), relations as a single JSON document, and the street network as
a CSV file with a node block and an edge block separated by a blank line.

Readers run in one of two modes: fail-fast (default, first violation
raises) or collecting, where every violation lands in a caller-supplied
list so `validate` can report them all.
"""

from __future__ import annotations

import json
import logging

import numpy as np

from .records import (
    DataError,
    PostRecord,
    SpatialNetwork,
    UserRelations,
    build_spatial_network,
    build_user_relations,
    validate_post,
)

log = logging.getLogger(__name__)

_REQUIRED = (
    "post_id",
    "user_id",
    "week_index",
    "geo",
    "has_text",
    "lang_flags",
    "face_vec",
    "vis_hidden",
    "scene_logits",
    "scene_attr_logits",
    "ha_logits_a",
    "ha_logits_b",
)
_OPTIONAL = ("text_hidden", "hv_logits_a", "hv_logits_b")


def _vector(value, where: str) -> np.ndarray:
    if not isinstance(value, list) or not all(isinstance(x, (int, float)) for x in value):
        raise DataError(f"{where}: malformed numeric array")
    arr = np.array(value, dtype=np.float64)
    arr.flags.writeable = False
    return arr


def _post_from_json(obj: dict, where: str) -> PostRecord:
    for key in _REQUIRED:
        if key not in obj or obj[key] is None:
            raise DataError(f"{where}: missing field {key}")
    unknown = set(obj) - set(_REQUIRED) - set(_OPTIONAL)
    if unknown:
        raise DataError(f"{where}: unknown field {sorted(unknown)[0]}")

    def opt(key: str) -> np.ndarray | None:
        v = obj.get(key)
        return None if v is None else _vector(v, f"{where} field {key}")

    geo = obj["geo"]
    if not (isinstance(geo, list) and len(geo) == 2):
        raise DataError(f"{where}: malformed field geo")
    lang = obj["lang_flags"]
    if not (isinstance(lang, list) and len(lang) == 3):
        raise DataError(f"{where}: malformed field lang_flags")
    face = obj["face_vec"]
    if not (isinstance(face, list) and len(face) == 3):
        raise DataError(f"{where}: malformed field face_vec")
    if not isinstance(obj["week_index"], int) or isinstance(obj["week_index"], bool):
        raise DataError(f"{where}: malformed field week_index")
    if not isinstance(obj["has_text"], bool):
        raise DataError(f"{where}: malformed field has_text")

    return PostRecord(
        post_id=str(obj["post_id"]),
        user_id=str(obj["user_id"]),
        week_index=obj["week_index"],
        geo=(float(geo[0]), float(geo[1])),
        has_text=obj["has_text"],
        lang_flags=tuple(int(x) for x in lang),
        face_vec=(int(face[0]), float(face[1]), float(face[2])),
        vis_hidden=_vector(obj["vis_hidden"], f"{where} field vis_hidden"),
        scene_logits=_vector(obj["scene_logits"], f"{where} field scene_logits"),
        scene_attr_logits=_vector(
            obj["scene_attr_logits"], f"{where} field scene_attr_logits"
        ),
        text_hidden=opt("text_hidden"),
        hv_logits_a=opt("hv_logits_a"),
        hv_logits_b=opt("hv_logits_b"),
        ha_logits_a=_vector(obj["ha_logits_a"], f"{where} field ha_logits_a"),
        ha_logits_b=_vector(obj["ha_logits_b"], f"{where} field ha_logits_b"),
    )


def read_posts_file(path: str, collect: list[str] | None = None) -> list[PostRecord]:
    """Parse and validate an NDJSON posts file.

    With `collect` given, violations are appended there and parsing
    continues; otherwise the first violation raises.
    """

    def report(msg: str) -> None:
        if collect is None:
            raise DataError(msg)
        collect.append(msg)

    records: list[PostRecord] = []
    seen: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            where = f"{path}:{lineno}"
            try:
                obj = json.loads(line)
            except json.JSONDecodeError:
                report(f"{where}: malformed JSON")
                continue
            if not isinstance(obj, dict):
                report(f"{where}: post is not an object")
                continue
            try:
                rec = _post_from_json(obj, where)
            except DataError as exc:
                report(str(exc))
                continue
            if rec.post_id in seen:
                report(f"duplicate post_id {rec.post_id}")
                continue
            seen.add(rec.post_id)
            bad = validate_post(rec)
            if bad:
                for msg in bad:
                    report(msg)
                if collect is None:
                    raise DataError(bad[0])
                continue
            records.append(rec)
    return records


def read_relations_file(path: str) -> UserRelations:
    """Parse the relations JSON document."""
    with open(path, encoding="utf-8") as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError:
            raise DataError(f"{path}: malformed JSON") from None
    if not isinstance(obj, dict):
        raise DataError(f"{path}: relations document is not an object")
    users = obj.get("users")
    contacts = obj.get("contacts", [])
    groups = obj.get("groups", {})
    if not isinstance(users, list):
        raise DataError(f"{path}: missing or malformed users list")
    if not isinstance(contacts, list) or not all(
        isinstance(p, list) and len(p) == 2 for p in contacts
    ):
        raise DataError(f"{path}: malformed contacts list")
    if not isinstance(groups, dict) or not all(
        isinstance(g, list) for g in groups.values()
    ):
        raise DataError(f"{path}: malformed groups mapping")
    return build_user_relations(
        [str(u) for u in users],
        [(str(a), str(b)) for a, b in contacts],
        {str(u): [str(g) for g in gs] for u, gs in groups.items()},
    )


def read_network_file(path: str) -> SpatialNetwork:
    """Parse the two-block street network CSV (nodes, blank line, edges)."""
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    blocks = [b for b in text.split("\n\n") if b.strip()]
    if len(blocks) != 2:
        raise DataError(f"{path}: expected a node block and an edge block")

    def rows(block: str, header: str) -> list[list[str]]:
        lines = [ln.strip() for ln in block.strip().split("\n")]
        if lines[0] != header:
            raise DataError(f"{path}: expected header '{header}', got '{lines[0]}'")
        return [ln.split(",") for ln in lines[1:]]

    nodes = []
    for parts in rows(blocks[0], "node_id,lat,lon"):
        if len(parts) != 3:
            raise DataError(f"{path}: malformed node row")
        try:
            nodes.append((parts[0], float(parts[1]), float(parts[2])))
        except ValueError:
            raise DataError(f"{path}: non-numeric node coordinate") from None
    edges = []
    for parts in rows(blocks[1], "src,dst,travel_min"):
        if len(parts) != 3:
            raise DataError(f"{path}: malformed edge row")
        try:
            edges.append((parts[0], parts[1], float(parts[2])))
        except ValueError:
            raise DataError(f"{path}: non-numeric travel time") from None
    return build_spatial_network(nodes, edges)


def ingest_dataset(
    posts_path: str, relations_path: str, network_path: str
) -> tuple[list[PostRecord], UserRelations, SpatialNetwork]:
    """Load and cross-validate the full input set.

    Posts are put into ascending post_id order; that order defines column
    and node indices everywhere downstream. Users referenced by posts but
    missing from the relations file are auto-registered with empty
    relations (with a warning).
    """
    records = read_posts_file(posts_path)
    if not records:
        raise DataError("empty dataset")
    records.sort(key=lambda r: r.post_id)
    relations = read_relations_file(relations_path)
    network = read_network_file(network_path)

    known = set(relations.users)
    extra = sorted({r.user_id for r in records} - known)
    if extra:
        log.warning("auto-registering %d unknown users (first: %s)", len(extra), extra[0])
        relations = relations.with_users_appended(extra)
    return records, relations, network
