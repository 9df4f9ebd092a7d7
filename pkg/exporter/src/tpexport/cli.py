"""Command line: `tpexport export ...` and `tpexport entities ...`."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import ExportError
from .encoders import ENCODER_CHOICES
from .export import ExportJob, export_embeddings, export_entity_vectors


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tpexport", description="Write embedding stores for turning point corpora."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("export", help="encode every corpus sentence into a store file")
    p.add_argument("--corpus", required=True)
    p.add_argument("--encoder", required=True, choices=ENCODER_CHOICES)
    p.add_argument("--word-table", default=None, help="word2vec text file (word-average)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("entities", help="extract cast and vocabulary word vectors")
    p.add_argument("--corpus", required=True)
    p.add_argument("--word-table", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_entities)
    return parser


def cmd_export(args) -> int:
    job = ExportJob(
        corpus_path=Path(args.corpus),
        encoder=args.encoder,
        out_path=Path(args.out),
        word_table_path=Path(args.word_table) if args.word_table else None,
    )
    out = export_embeddings(job)
    print(f"wrote {out}")
    return 0


def cmd_entities(args) -> int:
    out = export_entity_vectors(Path(args.corpus), Path(args.word_table), Path(args.out))
    print(f"wrote {out}")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(sys.argv[1:] if argv is None else argv)
    try:
        return args.func(args)
    except ExportError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
