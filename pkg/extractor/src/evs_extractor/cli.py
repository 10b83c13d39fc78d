"""Command line front end: extract mask-position probabilities to EVSL1."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .errors import ExtractorError
from .extract import ExtractionJob, extract, kshot_sample
from .records import read_records


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="evs-extract",
        description="Run a fill-mask model over labeled texts and write an EVSL1 logits file.",
    )
    parser.add_argument("--model", required=True, help="model name or local path")
    parser.add_argument(
        "--template", required=True,
        help="format string with one {text} and one {mask}, e.g. '{text} It was {mask}.'",
    )
    parser.add_argument("--input", type=Path, required=True, help=".jsonl or .csv records")
    parser.add_argument("--out-logits", type=Path, required=True)
    parser.add_argument("--out-vocab", type=Path, required=True)
    parser.add_argument("--max-len", type=int, default=256)
    parser.add_argument("--batch-size", type=int, default=8)
    parser.add_argument(
        "--kshot", type=int,
        help="sample k instances per class and extract the dev split only",
    )
    parser.add_argument("--seed", type=int, default=0, help="k-shot sampling seed")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        records = read_records(args.input)
        if args.kshot is not None:
            _, records = kshot_sample(records, args.kshot, args.seed)
        job = ExtractionJob(
            model=args.model,
            template=args.template,
            records=records,
            max_length=args.max_len,
            batch_size=args.batch_size,
        )
        result = extract(job, args.out_logits, args.out_vocab)
    except ExtractorError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 1
    print(
        json.dumps(
            {
                "out_logits": result.out_logits,
                "out_vocab": result.out_vocab,
                "num_instances": result.num_instances,
                "vocab_size": result.vocab_size,
                "num_labels": result.num_labels,
            },
            indent=2,
            sort_keys=True,
        )
    )
    return 0


if __name__ == "__main__":
    sys.exit(main())
