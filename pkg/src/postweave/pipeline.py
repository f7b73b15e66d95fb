"""End-to-end orchestration of ingest, features, labels, graphs, stats, export."""

from __future__ import annotations

import json
import logging
from typing import Any

from .config import PipelineConfig
from .export import export_outputs
from .features import FeatureMatrix, assemble_textual, assemble_visual
from .graphs import GraphArtifacts, GraphBuildNotes, build_multigraph
from .ingest import ingest_dataset, read_network_file, read_posts_file, read_relations_file
from .labels import LabelBundle, build_label_bundle, class_histogram, prediction_consistency
from .records import HA_CLASSES, HV_CLASSES, DataError, PostRecord, SpatialNetwork, UserRelations
from .sparse import MultiGraph
from .stats import StatsReport, build_report

log = logging.getLogger(__name__)


def _require_inputs(cfg: PipelineConfig) -> tuple[str, str, str]:
    for name in ("posts", "relations", "network"):
        if getattr(cfg, name) is None:
            raise DataError(f"config is missing input path {name}")
    return cfg.posts, cfg.relations, cfg.network


def load_inputs(cfg: PipelineConfig) -> tuple[list[PostRecord], UserRelations, SpatialNetwork]:
    posts, relations, network = _require_inputs(cfg)
    return ingest_dataset(posts, relations, network)


def label_summary(bundle: LabelBundle) -> dict[str, Any]:
    """Histogram and consistency block of one label bundle."""
    hv_mean, hv_std, hv_pairs = prediction_consistency(
        bundle.hv_top_sets_a, bundle.hv_top_sets_b
    )
    ha_mean, ha_std, ha_pairs = prediction_consistency(
        bundle.ha_top_sets_a, bundle.ha_top_sets_b
    )
    return {
        "hv": {
            "labeled": int(bundle.hv_labeled.sum()),
            "histogram": class_histogram(bundle.hv_class, HV_CLASSES),
            "consistency_mean": hv_mean,
            "consistency_std": hv_std,
            "pairs": hv_pairs,
        },
        "ha": {
            "labeled": int(bundle.ha_labeled.sum()),
            "histogram": class_histogram(bundle.ha_class, HA_CLASSES),
            "consistency_mean": ha_mean,
            "consistency_std": ha_std,
            "pairs": ha_pairs,
        },
    }


def load_reference_hists(path: str) -> dict[str, list[int]]:
    """Pull the label histograms out of another run's stats report."""
    with open(path, encoding="utf-8") as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError:
            raise DataError(f"{path}: malformed JSON") from None
    try:
        return {
            "hv": obj["labels"]["hv"]["histogram"],
            "ha": obj["labels"]["ha"]["histogram"],
        }
    except (KeyError, TypeError):
        raise DataError(f"{path}: not a stats report with label histograms") from None


def compute_all(
    cfg: PipelineConfig,
    records: list[PostRecord],
    relations: UserRelations,
    network: SpatialNetwork,
) -> tuple[FeatureMatrix, FeatureMatrix, LabelBundle, MultiGraph, GraphBuildNotes, GraphArtifacts, StatsReport]:
    """Run every computation stage on an in-memory dataset."""
    visual = assemble_visual(records)
    textual = assemble_textual(records)
    bundle = build_label_bundle(records, cfg.graph)
    graph, notes, artifacts = build_multigraph(records, relations, network, cfg.graph)
    reference = load_reference_hists(cfg.compare_stats) if cfg.compare_stats else None
    report = build_report(
        graph,
        network,
        notes,
        label_summary(bundle),
        artifacts.posts_per_node,
        reference,
        threads=cfg.threads,
    )
    return visual, textual, bundle, graph, notes, artifacts, report


def run_pipeline(cfg: PipelineConfig) -> dict:
    """Full run: ingest through export. Returns the manifest."""
    records, relations, network = load_inputs(cfg)
    log.info("ingested %d posts, %d users, %d street nodes",
             len(records), len(relations.users), network.node_count)
    visual, textual, bundle, graph, _, _, report = compute_all(
        cfg, records, relations, network
    )
    post_ids = [r.post_id for r in records]
    return export_outputs(
        cfg.out,
        post_ids,
        visual,
        textual,
        bundle,
        graph,
        report,
        export_composed=cfg.export_composed,
    )


def validate_inputs(cfg: PipelineConfig) -> dict:
    """Schema validation only; returns a report listing ALL violations."""
    posts, relations, network = _require_inputs(cfg)
    violations: list[str] = []
    records = read_posts_file(posts, collect=violations)
    if not records and not violations:
        violations.append("empty dataset")
    try:
        read_relations_file(relations)
    except DataError as exc:
        violations.append(str(exc))
    try:
        read_network_file(network)
    except DataError as exc:
        violations.append(str(exc))
    return {
        "records_ok": len(records),
        "violations": violations,
        "count": len(violations),
    }
