"""
Benchmark data commands

- forge data sentiment FILE [--dedup]
- forge data conll FILE... [--repair] [--strict] [--output FILE]
- forge data carve FILE --output DIR
- forge data audit --train FILE --valid FILE --test FILE
- forge data split FILE --output DIR [--no-official-test]
"""

import logging
from pathlib import Path
from typing import List

from ..benchmarks import (
    SplitSpec,
    audit_leakage,
    carve_validation,
    deduplicate_samples,
    find_violations,
    label_counts,
    load_conll,
    load_conll_files,
    load_sentiment,
    save_conll,
    split_dataset,
    write_splits,
)
from ..core.config import RunConfig
from ..core.errors import AppException, ErrorCode
from ..metrics import length_stats
from .common import emit, require

logger = logging.getLogger(__name__)

CONLL_SUFFIXES = (".conll", ".bio", ".txt")


def _load(path: str) -> List:
    if Path(path).suffix.lower() in CONLL_SUFFIXES:
        return load_conll(path, repair=True)
    return load_sentiment(path, audit=False)


def _spec(run: RunConfig, **values) -> SplitSpec:
    return SplitSpec.build(seed=run.seed, **values)


def sentiment_command(args, run: RunConfig) -> int:
    samples = load_sentiment(args.path)
    dropped = []
    if args.dedup:
        samples, dropped = deduplicate_samples(samples)
    splits = {}
    for sample in samples:
        splits.setdefault(sample.split or "all", []).append(sample)
    emit(
        {
            "samples": len(samples),
            "duplicates_dropped": len(dropped),
            "labels": label_counts(samples),
            "splits": {name: len(part) for name, part in sorted(splits.items())},
            "leakage": audit_leakage(splits).to_dict(),
        }
    )
    return 0


def conll_command(args, run: RunConfig) -> int:
    if args.output and len(args.paths) != 1:
        raise AppException(ErrorCode.USAGE_ERROR, message_en="--output takes exactly one input file")
    raw = load_conll_files(args.paths, repair=False, strict=False, workers=run.workers)
    report = {}
    for path, sentences in zip(args.paths, raw):
        report[path] = {
            "sentences": len(sentences),
            "tokens": sum(len(s) for s in sentences),
            "violations": len(find_violations(sentences)),
            "lengths": length_stats([len(s) for s in sentences]).to_dict() if sentences else None,
        }
    if args.strict or args.repair:
        loaded = load_conll_files(args.paths, repair=args.repair, strict=args.strict, workers=run.workers)
    else:
        loaded = raw
    if args.output:
        save_conll(loaded[0], args.output)
    emit(report)
    return 0


def carve_command(args, run: RunConfig) -> int:
    samples = _load(args.path)
    spec = _spec(run)
    train, valid = carve_validation(samples, spec)
    write_splits({"train": train, "valid": valid}, require(args.output, "--output"), spec)
    emit({"train": len(train), "valid": len(valid), "seed": spec.seed})
    return 0


def audit_command(args, run: RunConfig) -> int:
    splits = {}
    for name in ("train", "valid", "test"):
        path = getattr(args, name)
        if path:
            splits[name] = _load(path)
    if len(splits) < 2:
        raise AppException(ErrorCode.USAGE_ERROR, message_en="audit needs at least two of --train, --valid, --test")
    report = audit_leakage(splits)
    if report.count:
        logger.warning(f"Cross-split duplicates found: collisions={report.count}")
    emit(report.to_dict())
    return 0


def split_command(args, run: RunConfig) -> int:
    samples = _load(args.path)
    official = not args.no_official_test and any(getattr(s, "split", None) == "test" for s in samples)
    spec = _spec(run, official_test=official)
    splits = split_dataset(samples, spec)
    write_splits(splits, require(args.output, "--output"), spec)
    emit({name: len(part) for name, part in splits.items()})
    return 0


def register(subparsers) -> None:
    group = subparsers.add_parser("data", help="Benchmark dataset loading, auditing and splitting")
    commands = group.add_subparsers(dest="command", metavar="COMMAND")

    parser = commands.add_parser("sentiment", help="Load a sentiment TSV/CSV and report counts")
    parser.add_argument("path")
    parser.add_argument("--dedup", action="store_true")
    parser.set_defaults(handler=sentiment_command)

    parser = commands.add_parser("conll", help="Validate CoNLL files; optionally repair and rewrite")
    parser.add_argument("paths", nargs="+")
    parser.add_argument("--repair", action="store_true")
    parser.add_argument("--strict", action="store_true")
    parser.add_argument("--output")
    parser.set_defaults(handler=conll_command)

    parser = commands.add_parser("carve", help="Carve a validation split out of a training file")
    parser.add_argument("path")
    parser.add_argument("--output")
    parser.set_defaults(handler=carve_command)

    parser = commands.add_parser("audit", help="Report texts shared across splits")
    parser.add_argument("--train")
    parser.add_argument("--valid")
    parser.add_argument("--test")
    parser.set_defaults(handler=audit_command)

    parser = commands.add_parser("split", help="Three-way seeded split of a single file")
    parser.add_argument("path")
    parser.add_argument("--no-official-test", action="store_true")
    parser.add_argument("--output")
    parser.set_defaults(handler=split_command)
