"""Command-line entry point.

Subcommands: validate, synth, features, labels, graphs, stats, run. Every
subcommand takes a key-value config file; --seed, --out, and --threads
override the corresponding config entries. Exit codes: 0 ok, 1 data error,
2 I/O error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from .config import PipelineConfig, load_config
from .export import (
    write_coo_csv,
    write_feature_csv,
    write_json_file,
    write_labels_csv,
    write_post_order,
    write_series_csv,
)
from .pipeline import compute_all, load_inputs, run_pipeline, validate_inputs
from .records import DataError
from .synth import write_synthetic

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_DATA = 1
EXIT_IO = 2


def _emit(payload: dict) -> None:
    print(json.dumps(payload, indent=2))


def _cmd_validate(cfg: PipelineConfig) -> dict:
    return validate_inputs(cfg)


def _cmd_synth(cfg: PipelineConfig) -> dict:
    paths = write_synthetic(cfg.synth, cfg.out)
    return {"written": paths, "k": cfg.synth.k, "seed": cfg.synth.seed}


def _stage_outputs(cfg: PipelineConfig, stage: str) -> dict:
    records, relations, network = load_inputs(cfg)
    visual, textual, bundle, graph, _, _, report = compute_all(
        cfg, records, relations, network
    )
    post_ids = [r.post_id for r in records]
    os.makedirs(cfg.out, exist_ok=True)

    def p(name: str) -> str:
        return os.path.join(cfg.out, name)

    written: dict[str, int] = {}
    if stage == "features":
        _, n = write_feature_csv(p("features_visual.csv"), visual, post_ids)
        written["features_visual.csv"] = n
        _, n = write_feature_csv(p("features_textual.csv"), textual, post_ids)
        written["features_textual.csv"] = n
        _, n = write_post_order(p("post_order.csv"), post_ids)
        written["post_order.csv"] = n
    elif stage == "labels":
        _, n = write_labels_csv(p("labels.csv"), bundle, post_ids)
        written["labels.csv"] = n
        _, n = write_post_order(p("post_order.csv"), post_ids)
        written["post_order.csv"] = n
    elif stage == "graphs":
        for name, layer in graph.layers.items():
            _, n = write_coo_csv(p(f"graph_{name}.csv"), layer)
            written[f"graph_{name}.csv"] = n
        if cfg.export_composed:
            _, n = write_coo_csv(p("graph_composed.csv"), graph.composed)
            written["graph_composed.csv"] = n
        _, n = write_post_order(p("post_order.csv"), post_ids)
        written["post_order.csv"] = n
    elif stage == "stats":
        _, n = write_json_file(p("stats.json"), report.to_dict())
        written["stats.json"] = n
        for name, series in report.degree_series.items():
            _, n = write_series_csv(p(f"rank_size_{name}.csv"), "degree", series)
            written[f"rank_size_{name}.csv"] = n
        _, n = write_series_csv(p("posts_per_node.csv"), "posts", report.posts_per_node)
        written["posts_per_node.csv"] = n
    else:  # pragma: no cover
        raise ValueError(stage)
    return {"out": cfg.out, "written": written}


def _cmd_run(cfg: PipelineConfig) -> dict:
    return run_pipeline(cfg)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="postweave",
        description="Batch engine for multi-modal post datasets: feature "
        "matrices, filtered pseudo-labels, and temporal/social/spatial graphs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("validate", "schema-check the input files, reporting every violation"),
        ("synth", "generate a seeded synthetic dataset"),
        ("features", "assemble and write the feature matrices"),
        ("labels", "fuse and filter pseudo-labels"),
        ("graphs", "build and write the three graph layers"),
        ("stats", "compute the statistics report"),
        ("run", "full pipeline: ingest through export with manifest"),
    ):
        cmd = sub.add_parser(name, help=help_text)
        cmd.add_argument("config", help="key-value config file")
        cmd.add_argument("--seed", type=int, default=None, help="override synth.seed")
        cmd.add_argument("--out", default=None, help="override output directory")
        cmd.add_argument("--threads", type=int, default=None, help="worker pool size")
    return parser


_HANDLERS = {
    "validate": _cmd_validate,
    "synth": _cmd_synth,
    "features": lambda cfg: _stage_outputs(cfg, "features"),
    "labels": lambda cfg: _stage_outputs(cfg, "labels"),
    "graphs": lambda cfg: _stage_outputs(cfg, "graphs"),
    "stats": lambda cfg: _stage_outputs(cfg, "stats"),
    "run": _cmd_run,
}


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg.synth.seed = args.seed
        if args.out is not None:
            cfg.out = args.out
        if args.threads is not None:
            if args.threads < 1:
                raise DataError("--threads must be at least 1")
            cfg.threads = args.threads
        _emit(_HANDLERS[args.command](cfg))
        return EXIT_OK
    except DataError as exc:
        json.dump({"error": {"module": args.command, "message": str(exc)}}, sys.stderr, indent=2)
        sys.stderr.write("\n")
        return EXIT_DATA
    except OSError as exc:
        json.dump(
            {"error": {"module": args.command, "message": f"{exc.__class__.__name__}: {exc}"}},
            sys.stderr,
            indent=2,
        )
        sys.stderr.write("\n")
        return EXIT_IO


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
