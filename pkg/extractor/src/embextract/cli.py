"""Command line: `embextract images|text|manifest`."""

from __future__ import annotations

import argparse
import os
import sys

from .formats import read_embedding_header
from .job import (
    ExtractionJob,
    extract_image_embeddings,
    extract_text_embeddings,
    read_image_list,
    write_dataset_manifest,
)
from .naming import load_aliases


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="embextract",
        description="Run encoders over a dataset and emit embedding files.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("images", help="encode an image list")
    p.add_argument("--list", required=True,
                   help="tab-separated file: path[<TAB>label_index]")
    p.add_argument("--root", default=".", help="directory image paths resolve against")
    p.add_argument("--encoder", required=True,
                   help="e.g. test-projection:dim=64:seed=0 or torchvision:resnet18")
    p.add_argument("--out", required=True)
    p.add_argument("--prefix", default="train", choices=("train", "test"))
    p.add_argument("--resize", type=int, default=None)
    p.add_argument("--on-error", default="fail", choices=("fail", "skip"))

    p = sub.add_parser("text", help="encode one prompt per class")
    p.add_argument("--classes", required=True, help="file with one raw class name per line")
    p.add_argument("--encoder", required=True, help="e.g. test-bow:dim=64")
    p.add_argument("--template", default="a photo of a {label}.")
    p.add_argument("--aliases", default=None,
                   help="optional raw=display alias table, one pair per line")
    p.add_argument("--out", required=True)

    p = sub.add_parser("manifest", help="assemble a manifest for emitted files")
    p.add_argument("--out", required=True)
    p.add_argument("--dataset", required=True)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "images":
            images = read_image_list(args.list)
            job = ExtractionJob(root=args.root, images=images,
                                image_encoder=args.encoder, out_dir=args.out,
                                resize=args.resize, on_error=args.on_error)
            matrix, labels = extract_image_embeddings(job, prefix=args.prefix)
            print(f"wrote {matrix.shape[0]} x {matrix.shape[1]} embeddings "
                  f"to {args.out}/{args.prefix}.emb"
                  + (f" ({len(job.skipped)} skipped)" if job.skipped else ""))
        elif args.command == "text":
            with open(args.classes, encoding="utf-8") as f:
                names = [line.strip() for line in f if line.strip()]
            aliases = load_aliases(args.aliases) if args.aliases else None
            matrix, _ = extract_text_embeddings(names, args.encoder,
                                                args.template, args.out,
                                                aliases=aliases)
            print(f"wrote {matrix.shape[0]} class embeddings to {args.out}/classes.emb")
        else:  # manifest
            train = os.path.join(args.out, "train.emb")
            rows, dim = read_embedding_header(train)
            with open(os.path.join(args.out, "classes.txt"), encoding="utf-8") as f:
                num_classes = sum(1 for line in f if line.strip())
            with_text = os.path.exists(os.path.join(args.out, "classes.emb"))
            path = write_dataset_manifest(args.out, args.dataset, dim,
                                          num_classes, with_text=with_text)
            print(f"wrote {path}")
    except (OSError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
