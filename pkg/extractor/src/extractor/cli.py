"""`extract` command line: dataset -> frozen encoder -> CLEB store."""

from __future__ import annotations

import argparse
import sys

from .core import ExtractSpec, extract, sanity_report
from .datasets import _REGISTRY as DATASETS
from .encoders import _REGISTRY as ENCODERS


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="extract",
        description="Encode an image dataset into a CLEB-v1 embedding store",
    )
    parser.add_argument("--dataset", required=True, choices=sorted(DATASETS))
    parser.add_argument("--out", required=True, help="output .cleb path")
    parser.add_argument("--encoder", default="vitb32", choices=sorted(ENCODERS))
    parser.add_argument("--batch", type=int, default=256)
    parser.add_argument("--data-root", default="data/raw",
                        help="where raw datasets are downloaded/cached")
    parser.add_argument("--report", action="store_true",
                        help="print a sanity report of the written store")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    spec = ExtractSpec(dataset=args.dataset, out=args.out,
                       encoder=args.encoder, batch_size=args.batch,
                       data_root=args.data_root)
    store = extract(spec)
    print(f"wrote {args.out}: dim {store.dim}, {store.num_classes} classes, "
          f"{len(store)} records")
    if args.report:
        print(sanity_report(args.out))
    return 0


if __name__ == "__main__":
    sys.exit(main())
