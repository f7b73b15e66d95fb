"""Deterministic writers (and round-trip readers) for every output file.

All numbers are rendered with Python's shortest round-trip float
formatting, newlines are always "\\n", and key orders are fixed, so a rerun
on identical inputs reproduces identical bytes. The manifest records an
entry count and SHA-256 digest per file.
"""

from __future__ import annotations

import hashlib
import json
import os

import numpy as np

from .features import FeatureMatrix
from .labels import LabelBundle
from .records import DataError
from .sparse import MultiGraph, SparseSymMatrix
from .stats import StatsReport

MANIFEST_FORMAT = "postweave/1"

CORE_FILES = (
    "features_visual.csv",
    "features_textual.csv",
    "labels.csv",
    "graph_tem.csv",
    "graph_soc.csv",
    "graph_spa.csv",
)

_LABEL_ROWS = (
    [f"hv_soft_{i}" for i in range(11)]
    + [f"ha_soft_{i}" for i in range(9)]
    + ["hv_conf", "hv_agree", "ha_conf", "ha_agree"]
    + ["hv_labeled", "ha_labeled", "hv_class", "ha_class"]
)


class _HashedWriter:
    """Write text to a file while hashing the exact bytes."""

    def __init__(self, path: str):
        self.fh = open(path, "w", encoding="utf-8", newline="")
        self.digest = hashlib.sha256()
        self.lines = 0

    def line(self, text: str) -> None:
        data = text + "\n"
        self.fh.write(data)
        self.digest.update(data.encode("utf-8"))
        self.lines += 1

    def close(self) -> tuple[str, int]:
        self.fh.close()
        return self.digest.hexdigest(), self.lines


def _floats(values) -> list[str]:
    # tolist() yields Python floats whose repr is the shortest round-trip form
    return [repr(v) for v in np.asarray(values, dtype=np.float64).tolist()]


def _check_ids(post_ids: list[str]) -> None:
    for pid in post_ids:
        if "," in pid or "\n" in pid or not pid:
            raise DataError(f"post_id not CSV-safe: {pid!r}")


def write_feature_csv(path: str, matrix: FeatureMatrix, post_ids: list[str]) -> tuple[str, int]:
    """Header of post ids, then one line per matrix row."""
    if matrix.k != len(post_ids):
        raise DataError("feature matrix and post order disagree")
    _check_ids(post_ids)
    w = _HashedWriter(path)
    try:
        w.line(",".join(post_ids))
        for r in range(matrix.values.shape[0]):
            w.line(",".join(_floats(matrix.values[r])))
    finally:
        digest, lines = w.close()
    return digest, lines - 1


def read_feature_csv(path: str) -> tuple[list[str], np.ndarray]:
    with open(path, encoding="utf-8", newline="") as fh:
        header = fh.readline().rstrip("\n").split(",")
        rows = [
            np.array([float(x) for x in line.rstrip("\n").split(",")], dtype=np.float64)
            for line in fh
            if line.strip()
        ]
    return header, np.vstack(rows) if rows else np.zeros((0, len(header)))


def write_labels_csv(path: str, bundle: LabelBundle, post_ids: list[str]) -> tuple[str, int]:
    """Labeled rows (field name first column), one column per post."""
    if bundle.k != len(post_ids):
        raise DataError("label bundle and post order disagree")
    _check_ids(post_ids)
    grid: list[list[str]] = []
    for i in range(11):
        grid.append(_floats(bundle.hv_soft[i]))
    for i in range(9):
        grid.append(_floats(bundle.ha_soft[i]))
    grid.append(_floats(bundle.hv_conf))
    grid.append(_floats(bundle.hv_agree))
    grid.append(_floats(bundle.ha_conf))
    grid.append(_floats(bundle.ha_agree))
    grid.append([str(int(x)) for x in bundle.hv_labeled])
    grid.append([str(int(x)) for x in bundle.ha_labeled])
    grid.append([str(int(x)) for x in bundle.hv_class])
    grid.append([str(int(x)) for x in bundle.ha_class])

    w = _HashedWriter(path)
    try:
        w.line(",".join(["field"] + post_ids))
        for name, row in zip(_LABEL_ROWS, grid):
            w.line(",".join([name] + row))
    finally:
        digest, lines = w.close()
    return digest, lines - 1


def read_labels_csv(path: str) -> tuple[list[str], dict[str, np.ndarray]]:
    with open(path, encoding="utf-8", newline="") as fh:
        header = fh.readline().rstrip("\n").split(",")
        fields: dict[str, np.ndarray] = {}
        for line in fh:
            if not line.strip():
                continue
            parts = line.rstrip("\n").split(",")
            fields[parts[0]] = np.array([float(x) for x in parts[1:]], dtype=np.float64)
    return header[1:], fields


def write_coo_csv(path: str, matrix: SparseSymMatrix) -> tuple[str, int]:
    """Off-diagonal COO entries: row,col,weight with row < col, sorted."""
    off = matrix.off_diagonal()
    w = _HashedWriter(path)
    try:
        w.line("row,col,weight")
        weights = _floats(off.weight)
        rows = off.row.tolist()
        cols = off.col.tolist()
        for r, c, v in zip(rows, cols, weights):
            w.line(f"{r},{c},{v}")
    finally:
        digest, lines = w.close()
    return digest, lines - 1


def read_coo_csv(path: str, dim: int) -> SparseSymMatrix:
    rows: list[int] = []
    cols: list[int] = []
    vals: list[float] = []
    with open(path, encoding="utf-8", newline="") as fh:
        header = fh.readline().rstrip("\n")
        if header != "row,col,weight":
            raise DataError(f"{path}: unexpected COO header")
        for line in fh:
            if not line.strip():
                continue
            r, c, v = line.rstrip("\n").split(",")
            rows.append(int(r))
            cols.append(int(c))
            vals.append(float(v))
    return SparseSymMatrix.from_entries(
        dim,
        np.array(rows, dtype=np.int64),
        np.array(cols, dtype=np.int64),
        np.array(vals, dtype=np.float64),
    )


def write_post_order(path: str, post_ids: list[str]) -> tuple[str, int]:
    _check_ids(post_ids)
    w = _HashedWriter(path)
    try:
        w.line("index,post_id")
        for i, pid in enumerate(post_ids):
            w.line(f"{i},{pid}")
    finally:
        digest, lines = w.close()
    return digest, lines - 1


def read_post_order(path: str) -> list[str]:
    out = []
    with open(path, encoding="utf-8", newline="") as fh:
        fh.readline()
        for line in fh:
            if line.strip():
                out.append(line.rstrip("\n").split(",", 1)[1])
    return out


def write_series_csv(path: str, column: str, series: np.ndarray) -> tuple[str, int]:
    """Rank-size series: rank (1-based), value."""
    w = _HashedWriter(path)
    try:
        w.line(f"rank,{column}")
        for i, v in enumerate(series.tolist(), start=1):
            w.line(f"{i},{v}")
    finally:
        digest, lines = w.close()
    return digest, lines - 1


def write_json_file(path: str, payload: dict) -> tuple[str, int]:
    data = json.dumps(payload, indent=2) + "\n"
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(data)
    return hashlib.sha256(data.encode("utf-8")).hexdigest(), 1


def export_outputs(
    out_dir: str,
    post_ids: list[str],
    visual: FeatureMatrix,
    textual: FeatureMatrix,
    bundle: LabelBundle,
    graph: MultiGraph,
    report: StatsReport,
    *,
    export_composed: bool = False,
) -> dict:
    """Write every deliverable and return the manifest (also written).

    The manifest's "files" block lists the six core outputs; the post-order
    sidecar, stats report, rank-size series, and the optional composed graph
    are digested under "sidecars".
    """
    if not post_ids:
        raise DataError("empty dataset")
    if not (visual.k == textual.k == bundle.k == graph.node_count == len(post_ids)):
        raise DataError("output stages disagree on post count")
    os.makedirs(out_dir, exist_ok=True)

    files: dict[str, dict] = {}
    sidecars: dict[str, dict] = {}

    def record(block: dict, name: str, digest_entries: tuple[str, int]) -> None:
        digest, entries = digest_entries
        block[name] = {"entries": entries, "sha256": digest}

    def p(name: str) -> str:
        return os.path.join(out_dir, name)

    record(files, "features_visual.csv", write_feature_csv(p("features_visual.csv"), visual, post_ids))
    record(files, "features_textual.csv", write_feature_csv(p("features_textual.csv"), textual, post_ids))
    record(files, "labels.csv", write_labels_csv(p("labels.csv"), bundle, post_ids))
    record(files, "graph_tem.csv", write_coo_csv(p("graph_tem.csv"), graph.layers["tem"]))
    record(files, "graph_soc.csv", write_coo_csv(p("graph_soc.csv"), graph.layers["soc"]))
    record(files, "graph_spa.csv", write_coo_csv(p("graph_spa.csv"), graph.layers["spa"]))

    record(sidecars, "post_order.csv", write_post_order(p("post_order.csv"), post_ids))
    record(sidecars, "stats.json", write_json_file(p("stats.json"), report.to_dict()))
    for name, series in report.degree_series.items():
        record(sidecars, f"rank_size_{name}.csv", write_series_csv(p(f"rank_size_{name}.csv"), "degree", series))
    record(
        sidecars,
        "posts_per_node.csv",
        write_series_csv(p("posts_per_node.csv"), "posts", report.posts_per_node),
    )
    if export_composed:
        record(sidecars, "graph_composed.csv", write_coo_csv(p("graph_composed.csv"), graph.composed))

    manifest = {
        "format": MANIFEST_FORMAT,
        "k": len(post_ids),
        "files": files,
        "sidecars": sidecars,
    }
    write_json_file(p("manifest.json"), manifest)
    return manifest
