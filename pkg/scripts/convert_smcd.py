#!/usr/bin/env python3
"""
Convert an upstream sentiment release into train/test TSV files

The upstream files are CSV or TSV with a text column and a label column
(0/1/2 or names, see SENTIMENT_LABEL_ALIASES). Exact duplicates are dropped
(first occurrence wins) before writing; duplicates across the two inputs
are reported.

Usage:
    python scripts/convert_smcd.py --train upstream/train.csv --test upstream/test.csv --output data/smcd
"""

import argparse
import logging
import os
import sys
from pathlib import Path

# Add the project root to Python path
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from corpus_forge.benchmarks import audit_leakage, deduplicate_samples, label_counts, load_sentiment
from corpus_forge.core.errors import AppException, handle_exception

logger = logging.getLogger("convert_smcd")


def write_tsv(samples, path: Path) -> None:
    lines = []
    for sample in samples:
        text = " ".join(sample.text.split())
        lines.append(f"{text}\t{sample.label_name}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def convert(train_path: str, test_path: str, output: str) -> dict:
    splits = {}
    for name, path in (("train", train_path), ("test", test_path)):
        samples, dropped = deduplicate_samples(load_sentiment(path, audit=False))
        logger.info(f"{name}: kept={len(samples)} duplicates_dropped={len(dropped)} labels={label_counts(samples)}")
        splits[name] = samples
    report = audit_leakage(splits)
    if report.count:
        logger.warning(f"Texts present in both train and test: {report.count}")
    out = Path(output)
    out.mkdir(parents=True, exist_ok=True)
    for name, samples in splits.items():
        write_tsv(samples, out / f"{name}.tsv")
    return {name: len(samples) for name, samples in splits.items()}


def main() -> int:
    parser = argparse.ArgumentParser(description="Convert upstream sentiment files to forge TSV.")
    parser.add_argument("--train", required=True)
    parser.add_argument("--test", required=True)
    parser.add_argument("--output", required=True)
    args = parser.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    try:
        counts = convert(args.train, args.test, args.output)
    except AppException as e:
        return handle_exception(e)
    print(f"Wrote {counts} to {args.output}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
