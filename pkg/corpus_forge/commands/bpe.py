"""
Tokenizer commands

- forge bpe train (--corpus MANIFEST | --input FILE...) --vocab-size N --output DIR
- forge bpe encode --tokenizer DIR (TEXT | --input FILE...)
- forge bpe decode --tokenizer DIR ID...
- forge bpe inspect --tokenizer DIR --input FILE...
"""

import json
import logging
import sys

from ..core.config import Config, RunConfig
from ..core.errors import AppException, ErrorCode
from ..corpus import CorpusManifest
from ..tokenizer import inspect, load_tokenizer, save_training_result, train, train_from_iterator
from .common import emit, iter_lines, require

logger = logging.getLogger(__name__)


def train_command(args, run: RunConfig) -> int:
    vocab_size = args.vocab_size or Config.VOCAB_SIZE
    min_pair_frequency = args.min_pair_frequency if args.min_pair_frequency is not None else Config.MIN_PAIR_FREQUENCY
    output = require(args.output, "--output")
    if args.corpus:
        result = train(CorpusManifest.load(args.corpus), vocab_size, min_pair_frequency, workers=run.workers)
    elif args.input:
        result = train_from_iterator(iter_lines(args.input), vocab_size, min_pair_frequency)
    else:
        raise AppException(ErrorCode.USAGE_ERROR, message_en="bpe train needs --corpus or --input")
    paths = save_training_result(result, output)
    if result.truncated:
        logger.warning(f"Vocabulary truncated: requested={vocab_size} reached={result.vocab.size}")
    emit(
        {
            "vocab_size": result.vocab.size,
            "merges": len(result.merges),
            "truncated": result.truncated,
            "corpus_fingerprint": result.corpus_fingerprint,
            "files": {name: str(path) for name, path in paths.items()},
        }
    )
    return 0


def encode_command(args, run: RunConfig) -> int:
    tokenizer = load_tokenizer(require(args.tokenizer, "--tokenizer"))
    texts = [args.text] if args.text is not None else list(iter_lines(require(args.input, "--input")))
    for text in texts:
        ids = tokenizer.encode_ids(text, add_special_tokens=args.add_special_tokens)
        sys.stdout.write(json.dumps(ids) + "\n")
    return 0


def decode_command(args, run: RunConfig) -> int:
    tokenizer = load_tokenizer(require(args.tokenizer, "--tokenizer"))
    sys.stdout.write(tokenizer.decode(args.ids) + "\n")
    return 0


def inspect_command(args, run: RunConfig) -> int:
    tokenizer = load_tokenizer(require(args.tokenizer, "--tokenizer"))
    emit(inspect(tokenizer, iter_lines(require(args.input, "--input"))))
    return 0


def register(subparsers) -> None:
    group = subparsers.add_parser("bpe", help="Train and apply the byte-level BPE tokenizer")
    commands = group.add_subparsers(dest="command", metavar="COMMAND")

    parser = commands.add_parser("train", help="Learn merges and write vocab/merges/metadata files")
    parser.add_argument("--corpus", help="Corpus manifest (file or directory)")
    parser.add_argument("--input", nargs="+", help="Plain-text files, one document per line")
    parser.add_argument("--vocab-size", type=int)
    parser.add_argument("--min-pair-frequency", type=int)
    parser.add_argument("--output")
    parser.set_defaults(handler=train_command)

    parser = commands.add_parser("encode", help="Print token ids as JSON arrays, one line per text")
    parser.add_argument("text", nargs="?")
    parser.add_argument("--tokenizer")
    parser.add_argument("--input", nargs="+")
    parser.add_argument("--add-special-tokens", action="store_true")
    parser.set_defaults(handler=encode_command)

    parser = commands.add_parser("decode", help="Print the text of a token id sequence")
    parser.add_argument("ids", nargs="+", type=int)
    parser.add_argument("--tokenizer")
    parser.set_defaults(handler=decode_command)

    parser = commands.add_parser("inspect", help="Compression report on held-out text")
    parser.add_argument("--tokenizer")
    parser.add_argument("--input", nargs="+")
    parser.set_defaults(handler=inspect_command)
