"""Raw post intake.

A raw post is one line of NDJSON naming an image file and carrying the
sentence list of the caption; this module parses and validates those lines
and derives the week index used downstream.

Sentences may be plain strings or objects with a `text` and an optional
`lang` code; missing codes are filled later by the offline detector.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from datetime import date, datetime, timezone


class ExtractError(Exception):
    """Invalid input data or a model artifact that cannot be used."""


@dataclass(frozen=True)
class RawPost:
    post_id: str
    user_id: str
    timestamp: datetime
    geo: tuple[float, float]  # (lat, lon) degrees
    image: str  # path, resolved against the image directory
    sentences: tuple[tuple[str, str | None], ...]  # (text, lang code or None)


def week_ordinal(ts: datetime) -> int:
    """Whole ISO weeks between the week containing `ts` and week 0001-W01."""
    iso = ts.date().isocalendar()
    monday = date.fromisocalendar(iso[0], iso[1], 1)
    return (monday.toordinal() - 1) // 7


def parse_timestamp(value: str, where: str) -> datetime:
    if not isinstance(value, str):
        raise ExtractError(f"{where}: timestamp must be an ISO-8601 string")
    text = value.strip()
    if text.endswith(("Z", "z")):
        text = text[:-1] + "+00:00"
    try:
        ts = datetime.fromisoformat(text)
    except ValueError:
        raise ExtractError(f"{where}: malformed timestamp {value!r}") from None
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    return ts


def _parse_sentences(value, where: str) -> tuple[tuple[str, str | None], ...]:
    if not isinstance(value, list):
        raise ExtractError(f"{where}: sentences must be a list")
    out: list[tuple[str, str | None]] = []
    for i, item in enumerate(value):
        if isinstance(item, str):
            text, lang = item, None
        elif isinstance(item, dict):
            text = item.get("text")
            lang = item.get("lang")
            if not isinstance(text, str):
                raise ExtractError(f"{where}: sentence {i} has no text")
            if lang is not None and not isinstance(lang, str):
                raise ExtractError(f"{where}: sentence {i} has a non-string lang")
        else:
            raise ExtractError(f"{where}: sentence {i} is neither string nor object")
        if not text.strip():
            raise ExtractError(f"{where}: sentence {i} is blank")
        out.append((text, lang.lower() if lang else None))
    return tuple(out)


def _raw_from_json(obj: dict, where: str) -> RawPost:
    for key in ("post_id", "user_id", "timestamp", "geo", "image", "sentences"):
        if key not in obj or obj[key] is None:
            raise ExtractError(f"{where}: missing field {key}")
    geo = obj["geo"]
    if not (isinstance(geo, list) and len(geo) == 2
            and all(isinstance(x, (int, float)) for x in geo)):
        raise ExtractError(f"{where}: malformed field geo")
    lat, lon = float(geo[0]), float(geo[1])
    if not (-90.0 <= lat <= 90.0 and -180.0 <= lon <= 180.0):
        raise ExtractError(f"{where}: geo out of range")
    post_id = str(obj["post_id"])
    if not post_id or "," in post_id or "\n" in post_id:
        raise ExtractError(f"{where}: post_id empty or not CSV-safe")
    user_id = str(obj["user_id"])
    if not user_id:
        raise ExtractError(f"{where}: empty user_id")
    image = obj["image"]
    if not isinstance(image, str) or not image:
        raise ExtractError(f"{where}: malformed field image")
    return RawPost(
        post_id=post_id,
        user_id=user_id,
        timestamp=parse_timestamp(obj["timestamp"], where),
        geo=(lat, lon),
        image=image,
        sentences=_parse_sentences(obj["sentences"], where),
    )


def read_raw_posts(path: str) -> list[RawPost]:
    """Parse a raw-post NDJSON file, failing fast on the first violation."""
    posts: list[RawPost] = []
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
                raise ExtractError(f"{where}: malformed JSON") from None
            if not isinstance(obj, dict):
                raise ExtractError(f"{where}: raw post is not an object")
            raw = _raw_from_json(obj, where)
            if raw.post_id in seen:
                raise ExtractError(f"duplicate post_id {raw.post_id}")
            seen.add(raw.post_id)
            posts.append(raw)
    if not posts:
        raise ExtractError(f"{path}: empty raw dataset")
    return posts
