"""Command line: extract frozen-backbone embeddings into a DALB file.

    embed-extract --dataset cifar10 --split train --out cifar10_train.dalb
    embed-extract --dataset cifar10 --split train --out smoke.dalb --limit 64
"""

from __future__ import annotations

import argparse
import logging
import sys

from .extract import ExtractionJob, extract


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="embed-extract", description=__doc__.splitlines()[0])
    parser.add_argument("--dataset", required=True,
                        help="cifar10|cifar100|stl10|food101|flowers102|imagenet|snacks|"
                             "stanforddogs|tinyimagenet|imagefolder:<root>|fake:<n>:<k>")
    parser.add_argument("--split", required=True, help="train or test (dataset dependent)")
    parser.add_argument("--out", required=True)
    parser.add_argument("--backbone", default="dinov2_vits14")
    parser.add_argument("--batch", type=int, default=256)
    parser.add_argument("--limit", type=int, default=None, help="smoke mode: first N images")
    parser.add_argument("--device", default="auto")
    parser.add_argument("--data-root", default="./data")
    parser.add_argument("--log", choices=("quiet", "info", "debug"), default="info")
    return parser


def dispatch(argv) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    level = {"quiet": logging.WARNING, "info": logging.INFO, "debug": logging.DEBUG}[args.log]
    logging.basicConfig(level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")
    job = ExtractionJob(
        dataset=args.dataset,
        split=args.split,
        out=args.out,
        backbone=args.backbone,
        device=args.device,
        batch_size=args.batch,
        limit=args.limit,
        data_root=args.data_root,
    )
    try:
        extract(job)
    except Exception as exc:
        message = str(exc).replace("\n", " ")
        print(f"error: {type(exc).__name__}: {message}", file=sys.stderr)
        return 1
    return 0


def main() -> None:
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
