"""Command-line entry point for the exporter."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from embed_exporter.encoders import EncoderError
from embed_exporter.export import ExportJob, export_embeddings


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="embed-export",
        description="Embed a raw-text JSONL corpus with a sentence encoder",
    )
    parser.add_argument("--in", dest="input", required=True, help="input JSONL corpus (text, no embeddings)")
    parser.add_argument("--out", dest="output", required=True, help="output JSONL corpus with embeddings")
    parser.add_argument("--model", default="hash:384",
                        help="encoder identifier: hash:<dim>[:seed] or a sentence-transformers model name")
    parser.add_argument("--batch-size", type=int, default=32)
    parser.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    job = ExportJob(
        input_path=Path(args.input),
        output_path=Path(args.output),
        encoder=args.model,
        batch_size=args.batch_size,
    )
    try:
        stats = export_embeddings(job)
    except (EncoderError, OSError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    print(f"wrote {stats.written} records (dim {stats.dim}, {len(stats.skipped)} skipped) to {args.output}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
