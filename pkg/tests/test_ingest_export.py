"""File IO: parsing with exact diagnostics, byte-stable export round trips."""

from __future__ import annotations

import hashlib
import json
import logging

import numpy as np
import pytest

from postweave.export import (
    export_outputs,
    read_coo_csv,
    read_feature_csv,
    read_labels_csv,
    read_post_order,
    write_coo_csv,
    write_feature_csv,
    write_post_order,
)
from postweave.features import FeatureMatrix, assemble_textual, assemble_visual
from postweave.graphs import build_multigraph
from postweave.ingest import (
    ingest_dataset,
    read_network_file,
    read_posts_file,
    read_relations_file,
)
from postweave.labels import build_label_bundle
from postweave.pipeline import label_summary
from postweave.records import DataError, GraphConfig
from postweave.sparse import SparseSymMatrix
from postweave.stats import build_report
from postweave.synth import (
    write_network_file,
    write_posts_file,
    write_relations_file,
)
from util import mk_post, simplex


@pytest.fixture
def written(tmp_path, tiny_dataset):
    records, relations, network = tiny_dataset
    posts = tmp_path / "posts.ndjson"
    rel = tmp_path / "relations.json"
    net = tmp_path / "network.csv"
    write_posts_file(str(posts), records)
    write_relations_file(str(rel), relations)
    write_network_file(str(net), network)
    return str(posts), str(rel), str(net), tiny_dataset


def test_posts_roundtrip_is_exact(written):
    posts_path, _, _, (records, _, _) = written
    loaded = read_posts_file(posts_path)
    assert len(loaded) == len(records)
    for orig, back in zip(records, loaded):
        assert back.post_id == orig.post_id
        assert back.user_id == orig.user_id
        assert back.week_index == orig.week_index
        assert back.geo == orig.geo
        assert back.has_text == orig.has_text
        assert back.lang_flags == orig.lang_flags
        assert back.face_vec == orig.face_vec
        assert np.array_equal(back.vis_hidden, orig.vis_hidden)
        assert np.array_equal(back.scene_logits, orig.scene_logits)
        if orig.has_text:
            assert np.array_equal(back.text_hidden, orig.text_hidden)
            assert np.array_equal(back.hv_logits_a, orig.hv_logits_a)
        else:
            assert back.text_hidden is None and back.hv_logits_a is None


def test_relations_and_network_roundtrip(written):
    _, rel_path, net_path, (_, relations, network) = written
    rel = read_relations_file(rel_path)
    assert rel.users == relations.users
    assert rel.contacts == relations.contacts
    assert rel.groups == relations.groups
    net = read_network_file(net_path)
    assert net.node_ids == network.node_ids
    assert np.array_equal(net.lat, network.lat)
    assert np.array_equal(net.travel_min, network.travel_min)
    assert np.array_equal(net.edge_src, network.edge_src)


def test_ingest_sorts_by_post_id(written, tmp_path):
    posts_path, rel_path, net_path, (records, _, _) = written
    # rewrite posts in reverse order; ingest must restore id order
    reversed_path = tmp_path / "rev.ndjson"
    write_posts_file(str(reversed_path), list(reversed(records)))
    loaded, _, _ = ingest_dataset(str(reversed_path), rel_path, net_path)
    assert [r.post_id for r in loaded] == ["p1", "p2", "p3"]


def test_ingest_auto_registers_unknown_users(written, tmp_path, caplog):
    posts_path, _, net_path, (_, relations, _) = written
    bare = tmp_path / "bare.json"
    bare.write_text(json.dumps({"users": ["u1"], "contacts": [], "groups": {}}))
    with caplog.at_level(logging.WARNING):
        _, rel, _ = ingest_dataset(posts_path, str(bare), net_path)
    assert "auto-registering" in caplog.text
    assert "u2" in rel.users


def test_simplex_violation_message_exact(written, tmp_path):
    posts_path, _, _, (records, _, _) = written
    lines = open(posts_path).read().splitlines()
    rec = json.loads(lines[1])
    assert rec["post_id"] == "p2"
    rec["scene_logits"] = [v * 0.5 for v in rec["scene_logits"]]
    bad = tmp_path / "bad.ndjson"
    bad.write_text("\n".join([lines[0], json.dumps(rec), lines[2]]) + "\n")
    with pytest.raises(DataError) as err:
        read_posts_file(str(bad))
    assert "simplex violation post p2 field scene_logits" in str(err.value)


def test_duplicate_post_id_message_exact(written, tmp_path):
    posts_path, *_ = written
    lines = open(posts_path).read().splitlines()
    dup = tmp_path / "dup.ndjson"
    dup.write_text("\n".join([lines[0], lines[0], lines[2]]) + "\n")
    with pytest.raises(DataError) as err:
        read_posts_file(str(dup))
    assert "duplicate post_id p1" in str(err.value)


def test_collect_mode_reports_every_problem(written, tmp_path):
    posts_path, *_ = written
    lines = open(posts_path).read().splitlines()
    rec1 = json.loads(lines[0])
    rec1["geo"] = [95.0, 0.0]
    rec2 = json.loads(lines[2])
    rec2["face_vec"] = [0, 0.7, 0.0]
    bad = tmp_path / "two.ndjson"
    bad.write_text("\n".join([json.dumps(rec1), lines[1], json.dumps(rec2)]) + "\n")
    problems: list[str] = []
    read_posts_file(str(bad), collect=problems)
    assert len(problems) == 2
    assert any("latitude" in p for p in problems)
    assert any("zero-face" in p for p in problems)


def test_malformed_line_names_location(tmp_path):
    bad = tmp_path / "junk.ndjson"
    bad.write_text('{"post_id": "p1"\nnot json\n')
    with pytest.raises(DataError) as err:
        read_posts_file(str(bad))
    assert "junk.ndjson:1:" in str(err.value)


def test_unknown_and_missing_fields(tmp_path, written):
    posts_path, *_ = written
    base = json.loads(open(posts_path).read().splitlines()[0])
    extra = dict(base)
    extra["surprise"] = 1
    f1 = tmp_path / "extra.ndjson"
    f1.write_text(json.dumps(extra) + "\n")
    with pytest.raises(DataError, match="unknown field"):
        read_posts_file(str(f1))
    missing = dict(base)
    del missing["geo"]
    f2 = tmp_path / "missing.ndjson"
    f2.write_text(json.dumps(missing) + "\n")
    with pytest.raises(DataError, match="missing field"):
        read_posts_file(str(f2))


def test_empty_posts_file_is_empty_dataset(tmp_path, written):
    _, rel_path, net_path, _ = written
    empty = tmp_path / "none.ndjson"
    empty.write_text("")
    with pytest.raises(DataError, match="empty dataset"):
        ingest_dataset(str(empty), rel_path, net_path)


# ---------------------------------------------------------------------------
# export round trips


def test_feature_csv_roundtrip(tmp_path):
    mat = FeatureMatrix("visual", np.array([[0.1, 0.25], [1e-17, 3.0]]))
    path = tmp_path / "f.csv"
    digest, entries = write_feature_csv(str(path), mat, ["a", "b"])
    assert entries == 2  # one per matrix row
    ids, back = read_feature_csv(str(path))
    assert ids == ["a", "b"]
    assert np.array_equal(back, mat.values)  # repr round trip is exact
    assert digest == hashlib.sha256(path.read_bytes()).hexdigest()


def test_coo_csv_roundtrip(tmp_path):
    m = SparseSymMatrix.from_entries(
        5, [0, 1, 2, 3], [1, 2, 2, 3], [0.5, 1.0 / 3.0, 0.125, 2.0]
    )
    path = tmp_path / "g.csv"
    _, entries = write_coo_csv(str(path), m)
    back = read_coo_csv(str(path), 5)
    # diagonal is an internal detail: export strips it
    assert entries == 2
    assert back.equals(m.off_diagonal())


def test_post_order_roundtrip(tmp_path):
    path = tmp_path / "o.csv"
    write_post_order(str(path), ["p2", "p1"])
    assert read_post_order(str(path)) == ["p2", "p1"]


def test_post_ids_with_separators_rejected(tmp_path):
    mat = FeatureMatrix("visual", np.zeros((2, 1)))
    with pytest.raises(DataError, match="not CSV-safe"):
        write_feature_csv(str(tmp_path / "x.csv"), mat, ["a,b"])


def test_export_outputs_full(tmp_path, tiny_dataset):
    records, relations, network = tiny_dataset
    cfg = GraphConfig()
    visual = assemble_visual(records)
    textual = assemble_textual(records)
    bundle = build_label_bundle(records, cfg)
    graph, notes, artifacts = build_multigraph(records, relations, network, cfg)
    ppn = np.bincount(
        artifacts.space_indicator.assignment,
        minlength=artifacts.kept_network.node_count,
    )
    report = build_report(graph, network, notes, label_summary(bundle), ppn)
    post_ids = [r.post_id for r in records]

    out = tmp_path / "out"
    manifest = export_outputs(str(out), post_ids, visual, textual, bundle, graph, report)

    assert manifest["format"] == "postweave/1"
    assert manifest["k"] == 3
    assert set(manifest["files"]) == {
        "features_visual.csv",
        "features_textual.csv",
        "labels.csv",
        "graph_tem.csv",
        "graph_soc.csv",
        "graph_spa.csv",
    }
    assert manifest["files"]["features_visual.csv"]["entries"] == 982
    assert manifest["files"]["features_textual.csv"]["entries"] == 771

    # digests in the manifest match the bytes on disk
    for block in ("files", "sidecars"):
        for name, meta in manifest[block].items():
            data = (out / name).read_bytes()
            assert hashlib.sha256(data).hexdigest() == meta["sha256"], name

    # manifest.json exists and equals the returned dict
    on_disk = json.loads((out / "manifest.json").read_text())
    assert on_disk == manifest

    # labels file carries every row kind
    ids, rows = read_labels_csv(str(out / "labels.csv"))
    assert ids == post_ids
    assert "hv_conf" in rows and "ha_class" in rows
    assert rows["hv_soft_0"].shape == (3,)

    # graph files reload to the exported layers
    for name in ("tem", "soc", "spa"):
        back = read_coo_csv(str(out / f"graph_{name}.csv"), 3)
        assert back.equals(graph.layers[name].off_diagonal())

    assert read_post_order(str(out / "post_order.csv")) == post_ids
    stats = json.loads((out / "stats.json").read_text())
    assert stats["k"] == 3


def test_export_byte_stability(tmp_path, tiny_dataset):
    records, relations, network = tiny_dataset
    cfg = GraphConfig()

    def run(out_dir):
        visual = assemble_visual(records)
        textual = assemble_textual(records)
        bundle = build_label_bundle(records, cfg)
        graph, notes, artifacts = build_multigraph(records, relations, network, cfg)
        ppn = np.bincount(
            artifacts.space_indicator.assignment,
            minlength=artifacts.kept_network.node_count,
        )
        report = build_report(graph, network, notes, label_summary(bundle), ppn)
        return export_outputs(
            str(out_dir),
            [r.post_id for r in records],
            visual,
            textual,
            bundle,
            graph,
            report,
        )

    m1 = run(tmp_path / "a")
    m2 = run(tmp_path / "b")
    assert m1 == m2
    for name in m1["files"]:
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
