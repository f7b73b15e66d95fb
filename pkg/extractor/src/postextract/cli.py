"""Command-line front end.

Two subcommands: `extract` produces a posts NDJSON file the batch engine
ingests directly, `consistency` writes the stability study report.
Backends default to the seeded no-weights encoders and the skin-region
face detector; flags swap in pretrained checkpoints where available.

Exit codes match the engine's convention: 0 ok, 1 data error (bad input
or unusable artifact), 2 I/O error (missing files, unreadable paths).
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from .attributes import AttributeHeads
from .consistency import consistency_report, write_report
from .faces import SkinRegionDetector, YuNetDetector
from .pipeline import extract_posts, write_posts
from .rawposts import ExtractError, read_raw_posts
from .text import PretrainedTextEncoder, SeededTextEncoder
from .visual import PretrainedVisualEncoder, SeededVisualEncoder

EXIT_OK = 0
EXIT_DATA = 1
EXIT_IO = 2


def _visual_backend(args):
    if args.visual_weights:
        return PretrainedVisualEncoder(args.visual_weights)
    return SeededVisualEncoder()


def _text_backend(args):
    if args.text_model:
        return PretrainedTextEncoder(args.text_model)
    return SeededTextEncoder()


def _require_images_dir(path: str) -> None:
    if not os.path.isdir(path):
        raise FileNotFoundError(f"image directory not found: {path}")


def _cmd_extract(args) -> dict:
    _require_images_dir(args.images)
    raws = read_raw_posts(args.raw)
    heads = AttributeHeads(args.vote_model, args.stack_model)
    faces = YuNetDetector(args.face_model) if args.face_model else SkinRegionDetector()
    posts, skipped = extract_posts(
        raws,
        args.images,
        args.image_size,
        _visual_backend(args),
        faces,
        _text_backend(args),
        heads,
        args.local_lang,
    )
    write_posts(args.out, posts)
    return {"written": args.out, "posts": len(posts), "skipped": skipped}


def _cmd_consistency(args) -> dict:
    _require_images_dir(args.images)
    raws = read_raw_posts(args.raw)
    report = consistency_report(raws, args.images, _visual_backend(args), _text_backend(args))
    write_report(args.out, report)
    return {
        "written": args.out,
        "mean_scene_top5_iou": report["mean_scene_top5_iou"],
        "mean_value_top3_iou": report["mean_value_top3_iou"],
        "counts": report["counts"],
    }


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="postextract",
        description="Extract schema-conformant post records from raw images "
        "and sentence lists.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(cmd: argparse.ArgumentParser) -> None:
        cmd.add_argument("--raw", required=True, help="raw-post NDJSON file")
        cmd.add_argument("--images", required=True, help="image directory")
        cmd.add_argument("--out", required=True, help="output file path")
        cmd.add_argument("--local-lang", default="nl", help="local language code for the flags")
        cmd.add_argument("--visual-weights", default=None, help="pretrained visual checkpoint")
        cmd.add_argument("--text-model", default=None, help="pretrained text model directory")

    extract = sub.add_parser("extract", help="produce the posts NDJSON file")
    common(extract)
    extract.add_argument("--vote-model", required=True, help="voting classifier artifact")
    extract.add_argument("--stack-model", required=True, help="stacking classifier artifact")
    extract.add_argument("--face-model", default=None, help="YuNet ONNX face model")
    extract.add_argument(
        "--image-size",
        type=int,
        choices=sorted((150, 320)),
        default=150,
        help="working resolution: 150 for 150x150, 320 for 320x240",
    )

    consistency = sub.add_parser("consistency", help="write the stability study report")
    common(consistency)
    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    handlers = {"extract": _cmd_extract, "consistency": _cmd_consistency}
    try:
        result = handlers[args.command](args)
        json.dump(result, sys.stdout, indent=2)
        sys.stdout.write("\n")
        return EXIT_OK
    except ExtractError as exc:
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
