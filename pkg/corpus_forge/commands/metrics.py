"""
Metric commands

- forge metrics eval-ner --gold FILE --pred FILE
- forge metrics eval-cls --gold FILE --pred FILE
- forge metrics seqstats --tokenizer DIR... --input FILE...
- forge metrics bucket MAX:P95...
- forge metrics perplexity (--input FILE... | --curve FILE)
"""

import csv
import logging

from ..benchmarks import LABELS, load_conll, load_sentiment
from ..core.config import RunConfig
from ..core.errors import AppException, ErrorCode
from ..metrics import (
    LengthStats,
    length_stats,
    macro_f1,
    macro_f1_spans,
    measure_lengths,
    micro_f1_spans,
    perplexity,
    select_bucket,
    summarize_curve,
)
from ..tokenizer import load_tokenizer
from .common import emit, iter_lines, require

logger = logging.getLogger(__name__)


def eval_ner_command(args, run: RunConfig) -> int:
    gold = load_conll(require(args.gold, "--gold"))
    predicted = load_conll(require(args.pred, "--pred"), repair=True)
    gold_tags = [list(s.tags) for s in gold]
    predicted_tags = [list(s.tags) for s in predicted]
    micro = micro_f1_spans(gold_tags, predicted_tags)
    emit(
        {
            "sentences": len(gold),
            "micro": micro.to_dict(),
            "macro": macro_f1_spans(gold_tags, predicted_tags).to_dict(),
        }
    )
    return 0


def eval_cls_command(args, run: RunConfig) -> int:
    gold = load_sentiment(require(args.gold, "--gold"), audit=False)
    predicted = load_sentiment(require(args.pred, "--pred"), audit=False)
    score = macro_f1([s.label for s in gold], [s.label for s in predicted], len(LABELS))
    report = score.to_dict()
    report["labels"] = list(LABELS)
    report["samples"] = len(gold)
    emit(report)
    return 0


def seqstats_command(args, run: RunConfig) -> int:
    texts = list(iter_lines(require(args.input, "--input")))
    report, stats = {}, []
    for directory in require(args.tokenizer, "--tokenizer"):
        tokenizer = load_tokenizer(directory)
        current = length_stats(measure_lengths(texts, tokenizer, add_special_tokens=not args.no_special_tokens))
        stats.append(current)
        report[directory] = current.to_dict()
    emit({"tokenizers": report, "bucket": select_bucket(stats, args.step)})
    return 0


def _parse_pair(value: str) -> LengthStats:
    try:
        maximum, p95 = (int(v) for v in value.split(":"))
    except ValueError as e:
        raise AppException(ErrorCode.USAGE_ERROR, message_en=f"expected MAX:P95, got {value!r}") from e
    if not 0 < p95 <= maximum:
        raise AppException(
            ErrorCode.USAGE_ERROR,
            message_en=f"need 0 < P95 <= MAX, got {value!r}",
            detail={"max": maximum, "p95": p95},
        )
    return LengthStats(max=maximum, mean=p95, p95=p95)


def bucket_command(args, run: RunConfig) -> int:
    emit({"bucket": select_bucket([_parse_pair(v) for v in args.pairs], args.step)})
    return 0


def _read_curve(path: str):
    points = []
    with open(path, "r", encoding="utf-8", newline="") as handle:
        for row in csv.reader(handle):
            if not row or row[0].strip().lower() == "step":
                continue
            points.append((int(row[0]), float(row[1])))
    return points


def perplexity_command(args, run: RunConfig) -> int:
    if args.curve:
        summary = summarize_curve(_read_curve(args.curve), tolerance=args.tolerance)
        emit(
            {
                "final": summary.final,
                "minimum": summary.minimum,
                "minimum_step": summary.minimum_step,
                "convergence_step": summary.convergence_step,
                "spikes": summary.spikes,
            }
        )
        return 0
    try:
        losses = [float(line) for line in iter_lines(require(args.input, "--input"))]
    except ValueError as e:
        raise AppException(ErrorCode.VALIDATION_ERROR, message_en=f"loss files hold one number per line: {e}") from e
    emit({"positions": len(losses), "perplexity": perplexity(losses)})
    return 0


def register(subparsers) -> None:
    group = subparsers.add_parser("metrics", help="Span F1, macro F1, length statistics and perplexity")
    commands = group.add_subparsers(dest="command", metavar="COMMAND")

    parser = commands.add_parser("eval-ner", help="Span micro/macro F1 of a predicted CoNLL file")
    parser.add_argument("--gold")
    parser.add_argument("--pred")
    parser.set_defaults(handler=eval_ner_command)

    parser = commands.add_parser("eval-cls", help="Macro F1 of predicted sentiment labels")
    parser.add_argument("--gold")
    parser.add_argument("--pred")
    parser.set_defaults(handler=eval_cls_command)

    parser = commands.add_parser("seqstats", help="Token length statistics per tokenizer and the chosen bucket")
    parser.add_argument("--tokenizer", nargs="+")
    parser.add_argument("--input", nargs="+")
    parser.add_argument("--step", type=int)
    parser.add_argument("--no-special-tokens", action="store_true")
    parser.set_defaults(handler=seqstats_command)

    parser = commands.add_parser("bucket", help="Bucket length from MAX:P95 pairs")
    parser.add_argument("pairs", nargs="+")
    parser.add_argument("--step", type=int)
    parser.set_defaults(handler=bucket_command)

    parser = commands.add_parser("perplexity", help="Perplexity of loss values or a summary of a step,value curve")
    parser.add_argument("--input", nargs="+")
    parser.add_argument("--curve")
    parser.add_argument("--tolerance", type=float, default=0.05)
    parser.set_defaults(handler=perplexity_command)
