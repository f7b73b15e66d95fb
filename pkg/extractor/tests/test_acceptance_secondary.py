"""Shipping gate for the extractor.

Criterion 1: on the 20-image/20-text fixture the extractor produces a
posts file the batch engine's `validate` accepts with zero violations,
every simplex field sums to 1 within 1e-5, a rerun is bit-identical, and
the whole thing stays under five minutes of CPU-only wall time.

Criterion 2: the same output feeds the engine's `run` end to end,
finishing with exit code 0 and a complete manifest.

The engine is driven purely through its command line and file formats;
nothing here imports it.
"""

from __future__ import annotations

import json
import subprocess
import sys
import time

import numpy as np

from fixture_data import write_primary_inputs

EXTRACT = [sys.executable, "-m", "postextract.cli"]
ENGINE = [sys.executable, "-m", "postweave.cli"]

SIMPLEX_FIELDS = ("scene_logits", "scene_attr_logits", "hv_logits_a", "hv_logits_b",
                  "ha_logits_a", "ha_logits_b")
CORE_FILES = {
    "features_visual.csv", "features_textual.csv", "labels.csv",
    "graph_tem.csv", "graph_soc.csv", "graph_spa.csv",
}


def _extract(fixture_batch, out_path) -> float:
    started = time.monotonic()
    proc = subprocess.run(
        EXTRACT + [
            "extract",
            "--raw", fixture_batch["raw"],
            "--images", fixture_batch["images"],
            "--out", str(out_path),
            "--vote-model", fixture_batch["vote"],
            "--stack-model", fixture_batch["stack"],
        ],
        capture_output=True, text=True,
    )
    elapsed = time.monotonic() - started
    assert proc.returncode == 0, proc.stderr
    return elapsed


def _write_config(path, posts, relations, network, out_dir) -> None:
    path.write_text(
        f"posts = {posts}\nrelations = {relations}\nnetwork = {network}\nout = {out_dir}\n",
        encoding="utf-8",
    )


def test_criterion_1_validate_simplexes_rerun_and_budget(tmp_path, fixture_batch):
    posts_path = tmp_path / "posts.ndjson"
    elapsed = _extract(fixture_batch, posts_path)

    lines = posts_path.read_text(encoding="utf-8").splitlines()
    assert len(lines) == 20
    for line in lines:
        obj = json.loads(line)
        for field in SIMPLEX_FIELDS:
            if field in obj:
                vec = np.asarray(obj[field], dtype=np.float64)
                assert np.all(vec >= 0.0), (obj["post_id"], field)
                assert abs(vec.sum() - 1.0) <= 1e-5, (obj["post_id"], field)

    relations, network = write_primary_inputs(str(tmp_path))
    config = tmp_path / "pipeline.cfg"
    _write_config(config, posts_path, relations, network, tmp_path / "out")
    proc = subprocess.run(ENGINE + ["validate", str(config)], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    report = json.loads(proc.stdout)
    assert report["violations"] == []
    assert report["count"] == 0
    assert report["records_ok"] == 20

    second = tmp_path / "posts2.ndjson"
    elapsed += _extract(fixture_batch, second)
    assert second.read_bytes() == posts_path.read_bytes()

    assert elapsed < 300.0, f"extraction took {elapsed:.1f}s"
    print(f"[PASS] criterion 1: 0 violations, simplexes within 1e-5, "
          f"bit-identical rerun, {elapsed:.1f}s total")


def test_criterion_2_end_to_end_run_completes_the_manifest(tmp_path, fixture_batch):
    posts_path = tmp_path / "posts.ndjson"
    _extract(fixture_batch, posts_path)
    relations, network = write_primary_inputs(str(tmp_path))
    out_dir = tmp_path / "out"
    config = tmp_path / "pipeline.cfg"
    _write_config(config, posts_path, relations, network, out_dir)

    proc = subprocess.run(ENGINE + ["run", str(config)], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr

    manifest_path = out_dir / "manifest.json"
    assert manifest_path.is_file()
    manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    assert set(manifest["files"]) == CORE_FILES
    for name, entry in manifest["files"].items():
        assert (out_dir / name).is_file()
        assert isinstance(entry["entries"], int) and entry["entries"] >= 0
        assert len(entry["sha256"]) == 64 and int(entry["sha256"], 16) >= 0
    assert manifest["sidecars"]
    print("[PASS] criterion 2: extractor output ran end to end, manifest complete")
