"""Key-value config file parsing into the pipeline's dataclasses.

The config format is one `key = value` pair per line, `#` comments, blank
lines ignored. Graph parameters live under the `graph.` prefix and
synthetic-data parameters under `synth.`.
"""

from __future__ import annotations

import typing
from dataclasses import dataclass, field, fields

from .records import DataError, GraphConfig
from .synth import SynthConfig


@dataclass
class PipelineConfig:
    posts: str | None = None
    relations: str | None = None
    network: str | None = None
    out: str = "out"
    threads: int = 1
    export_composed: bool = False
    compare_stats: str | None = None
    graph: GraphConfig = field(default_factory=GraphConfig)
    synth: SynthConfig = field(default_factory=SynthConfig)


def _convert(raw: str, typ, key: str):
    if typ is bool:
        low = raw.lower()
        if low in ("true", "1", "yes"):
            return True
        if low in ("false", "0", "no"):
            return False
        raise DataError(f"config key {key}: expected boolean, got {raw!r}")
    try:
        if typ is int:
            return int(raw)
        if typ is float:
            return float(raw)
    except ValueError:
        raise DataError(f"config key {key}: expected {typ.__name__}, got {raw!r}") from None
    return raw  # strings (and optional strings) pass through


def _field_types(cls) -> dict[str, type]:
    hints = typing.get_type_hints(cls)
    out = {}
    for f in fields(cls):
        typ = hints[f.name]
        origin = typing.get_origin(typ)
        if origin is typing.Union or str(origin) == "types.UnionType":
            args = [a for a in typing.get_args(typ) if a is not type(None)]
            typ = args[0]
        out[f.name] = typ
    return out


def parse_config_text(text: str, path: str = "<config>") -> PipelineConfig:
    cfg = PipelineConfig()
    top = _field_types(PipelineConfig)
    graph_t = _field_types(GraphConfig)
    synth_t = _field_types(SynthConfig)

    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise DataError(f"{path}:{lineno}: expected key = value")
        key, raw = (part.strip() for part in line.split("=", 1))
        if key.startswith("graph."):
            name = key[len("graph."):]
            if name not in graph_t:
                raise DataError(f"{path}:{lineno}: unknown config key {key}")
            setattr(cfg.graph, name, _convert(raw, graph_t[name], key))
        elif key.startswith("synth."):
            name = key[len("synth."):]
            if name not in synth_t:
                raise DataError(f"{path}:{lineno}: unknown config key {key}")
            setattr(cfg.synth, name, _convert(raw, synth_t[name], key))
        else:
            if key not in top or key in ("graph", "synth"):
                raise DataError(f"{path}:{lineno}: unknown config key {key}")
            setattr(cfg, key, _convert(raw, top[key], key))

    # re-run the dataclass validators on the final values
    GraphConfig.__post_init__(cfg.graph)
    SynthConfig.__post_init__(cfg.synth)
    return cfg


def load_config(path: str) -> PipelineConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config_text(fh.read(), path)
