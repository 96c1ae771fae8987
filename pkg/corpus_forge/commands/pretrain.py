"""
Pretraining preparation commands

- forge pretrain pack --tokenizer DIR --corpus MANIFEST --output FILE.npy
- forge pretrain mask --tokenizer DIR --packed FILE.npy --epochs N --output FILE.jsonl
- forge pretrain schedule (--preset NAME [--total-steps N] | --peak-lr ... --total-steps ...) --dump-csv FILE.csv
- forge pretrain budget (--corpus-tokens N | --epochs E)
- forge pretrain params --shape base|large --vocab-size N
"""

import logging

from pydantic import ValidationError

from ..core.config import Config, RunConfig, config_manager
from ..core.errors import AppException, ErrorCode
from ..corpus import CorpusManifest, iter_texts
from ..pretrain import (
    BudgetSpec,
    Masker,
    MaskingPolicy,
    ScheduleSpec,
    corpus_tokens_for_epochs,
    count_parameters,
    dump_masked_jsonl,
    estimate_epochs,
    iter_masked_batches,
    load_packed,
    npy_path,
    pack_to_file,
    preset,
    write_schedule_csv,
)
from ..tokenizer import load_tokenizer
from .common import emit, require

logger = logging.getLogger(__name__)


def pack_command(args, run: RunConfig) -> int:
    tokenizer = load_tokenizer(require(args.tokenizer, "--tokenizer"))
    manifest = CorpusManifest.load(require(args.corpus, "--corpus"))
    length = args.sequence_length or Config.SEQUENCE_LENGTH
    streams = (tokenizer.encode_ids(text) for text in iter_texts(manifest))
    output = npy_path(require(args.output, "--output"))
    rows, tokens = pack_to_file(streams, output, length, tokenizer.eos_id, tokenizer.pad_id)
    emit({"rows": rows, "tokens": tokens, "sequence_length": length, "path": str(output)})
    return 0


def mask_command(args, run: RunConfig) -> int:
    tokenizer = load_tokenizer(require(args.tokenizer, "--tokenizer"))
    packed = load_packed(require(args.packed, "--packed"))
    policy = MaskingPolicy.default(seed=run.seed)
    if args.probability is not None:
        policy = MaskingPolicy(**{**policy.model_dump(), "mask_probability": args.probability})
    masker = Masker.for_tokenizer(policy, tokenizer)
    epochs = range(args.epochs or 1)
    batches = iter_masked_batches(masker, packed.ids, epochs, args.batch_size or 256, workers=run.workers)
    rows = dump_masked_jsonl(batches, require(args.output, "--output"))
    emit({"rows": rows, "epochs": len(epochs), "seed": policy.seed})
    return 0


def schedule_command(args, run: RunConfig) -> int:
    if args.preset:
        spec = preset(args.preset, total_steps=args.total_steps, peak_lr=args.peak_lr)
    else:
        spec = ScheduleSpec.build(
            kind=args.kind or "polynomial_decay",
            total_steps=require(args.total_steps, "--total-steps"),
            warmup_steps=args.warmup_steps or 0,
            peak_lr=require(args.peak_lr, "--peak-lr"),
            end_lr=args.end_lr or 0.0,
            power=args.power or 1.0,
        )
    path = write_schedule_csv(spec, require(args.output, "--dump-csv"), args.every or 1)
    emit({"path": str(path), **spec.model_dump(mode="json")})
    return 0


def budget_command(args, run: RunConfig) -> int:
    defaults = config_manager.get_constant("PRETRAIN_BUDGET")
    steps = args.total_steps or defaults["total_steps"]
    batch = args.batch_sequences or defaults["global_batch_sequences"]
    length = args.sequence_length or defaults["sequence_length"]
    if args.epochs is not None:
        tokens = corpus_tokens_for_epochs(args.epochs, steps, batch, length)
        emit({"corpus_tokens": tokens, "epochs": args.epochs})
        return 0
    if args.corpus_tokens is None:
        raise AppException(ErrorCode.USAGE_ERROR, message_en="budget needs --corpus-tokens or --epochs")
    try:
        budget = BudgetSpec(
            total_steps=steps,
            global_batch_sequences=batch,
            sequence_length=length,
            corpus_tokens=args.corpus_tokens,
        )
    except ValidationError as e:
        raise AppException(ErrorCode.BUDGET_INVALID, message_en=str(e)) from e
    epochs = estimate_epochs(budget, args.tokens_per_sequence)
    emit(
        {
            "consumed_tokens": budget.consumed_tokens,
            "corpus_tokens": budget.corpus_tokens,
            "epochs": float(epochs),
            "epochs_exact": f"{epochs.numerator}/{epochs.denominator}",
        }
    )
    return 0


def params_command(args, run: RunConfig) -> int:
    vocab_size = args.vocab_size or Config.VOCAB_SIZE
    emit({"shape": args.shape, "vocab_size": vocab_size, **count_parameters(args.shape, vocab_size)})
    return 0


def register(subparsers) -> None:
    group = subparsers.add_parser("pretrain", help="Packing, masking, schedules and budget accounting")
    commands = group.add_subparsers(dest="command", metavar="COMMAND")

    parser = commands.add_parser("pack", help="Tokenize a corpus and pack it into fixed-length rows")
    parser.add_argument("--tokenizer")
    parser.add_argument("--corpus")
    parser.add_argument("--sequence-length", type=int)
    parser.add_argument("--output")
    parser.set_defaults(handler=pack_command)

    parser = commands.add_parser("mask", help="Dynamic masking of packed rows, one JSONL record per row and epoch")
    parser.add_argument("--tokenizer")
    parser.add_argument("--packed")
    parser.add_argument("--epochs", type=int)
    parser.add_argument("--batch-size", type=int)
    parser.add_argument("--probability", type=float)
    parser.add_argument("--output")
    parser.set_defaults(handler=mask_command)

    parser = commands.add_parser("schedule", help="Write a step,lr CSV for a learning-rate schedule")
    parser.add_argument("--preset")
    parser.add_argument("--kind", choices=["polynomial_decay", "linear"])
    parser.add_argument("--total-steps", type=int)
    parser.add_argument("--warmup-steps", type=int)
    parser.add_argument("--peak-lr", type=float)
    parser.add_argument("--end-lr", type=float)
    parser.add_argument("--power", type=float)
    parser.add_argument("--every", type=int)
    parser.add_argument("--dump-csv", "--output", dest="output", help="step,lr CSV path")
    parser.set_defaults(handler=schedule_command)

    parser = commands.add_parser("budget", help="Epochs implied by a step budget, or the corpus size for an epoch count")
    parser.add_argument("--corpus-tokens", type=int)
    parser.add_argument("--epochs", type=float)
    parser.add_argument("--tokens-per-sequence", type=float)
    parser.add_argument("--total-steps", type=int)
    parser.add_argument("--batch-sequences", type=int)
    parser.add_argument("--sequence-length", type=int)
    parser.set_defaults(handler=budget_command)

    parser = commands.add_parser("params", help="Encoder parameter count")
    parser.add_argument("--shape", default="base")
    parser.add_argument("--vocab-size", type=int)
    parser.set_defaults(handler=params_command)
