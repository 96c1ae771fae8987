"""
Fine-tuning protocol commands

- forge tune run --task BMC|NEMO|SMCD --trainer mock|probe --data DIR [--journal FILE]
  [--tokenizer DIR] [--sequence-length N]
- forge tune report --journal FILE... [--kind results|hyperparameters|walltime] [--format md|csv]
- forge tune walltime --journal FILE... [--format md|csv]

Grid values come from the packaged defaults unless --batch-sizes / --learning-rates
(or the "tune" section of --config) override them. sequence_length is the bucket
measured with --tokenizer, else the task default, unless --sequence-length is given.
"""

import logging
import sys

from ..benchmarks import SplitSpec
from ..core.config import Config, RunConfig, config_manager
from ..databases import get_trial_journal
from ..services.trainers import TrainerFactory
from ..tokenizer import load_tokenizer
from ..tuning import (
    SEED_MODES,
    Task,
    emit_report,
    enumerate_grid,
    load_records,
    load_task_data,
    render_wall_time,
    run_grid,
    track_wall_time,
)
from .common import emit, parse_list, require

logger = logging.getLogger(__name__)


def _trainer_options(args) -> dict:
    options = dict(args.trainer_options or {})
    if args.tokenizer:
        options["tokenizer"] = args.tokenizer
    if args.features:
        options["features"] = args.features
    return options


def run_command(args, run: RunConfig) -> int:
    task = Task(require(args.task, "--task"))
    grid = config_manager.get_grid()
    batch_sizes = parse_list(args.batch_sizes, int) or grid["batch_sizes"]
    learning_rates = parse_list(args.learning_rates, float) or grid["learning_rates"]
    overrides = {
        "max_epochs": args.max_epochs or grid["max_epochs"],
        "patience": args.patience or grid["patience"],
        "warmup_fraction": grid["warmup_fraction"],
        "model": args.model or "default",
        "size_class": args.size_class or "base",
    }
    if args.metric:
        overrides["metric"] = args.metric
    if args.sequence_length:
        overrides["sequence_length"] = args.sequence_length
    tokenizer = load_tokenizer(args.tokenizer) if args.tokenizer else None
    data = load_task_data(
        task, require(args.data, "--data"), spec=SplitSpec.build(seed=run.seed), tokenizer=tokenizer
    )
    configs = enumerate_grid(
        batch_sizes,
        learning_rates,
        task,
        seed=run.seed,
        seed_mode=args.seed_mode or "shared",
        replicates=args.replicates or 1,
        data=data,
        **overrides,
    )
    journal = get_trial_journal(args.journal or Config.JOURNAL_PATH)
    trainer = TrainerFactory.get_trainer(args.trainer or "mock", _trainer_options(args))
    result = run_grid(
        configs,
        trainer,
        data,
        journal,
        workers=run.workers,
        full_evaluation=args.full_evaluation or None,
    )
    selected = result.selected
    emit(
        {
            "task": task.value,
            "trainer": trainer.trainer_name,
            "sequence_length": selected.config.sequence_length,
            "trials": len(result.records),
            "new_trials": result.new_trials,
            "failed": sum(1 for r in result.records if not r.succeeded),
            "selected": {
                "batch_size": selected.config.batch_size,
                "learning_rate": selected.config.learning_rate,
                "best_epoch": selected.best_epoch,
                "best_valid": selected.best_valid,
                "test_score": selected.test_score,
                "config_hash": selected.config_hash,
            },
            "journal": str(journal.path),
        }
    )
    return 0


def report_command(args, run: RunConfig) -> int:
    records = load_records(require(args.journal, "--journal"))
    text = emit_report(records, kind=args.kind or "results", fmt=args.format or "md", path=args.output)
    if args.output is None:
        sys.stdout.write(text)
    return 0


def walltime_command(args, run: RunConfig) -> int:
    summary = track_wall_time(load_records(require(args.journal, "--journal")))
    sys.stdout.write(render_wall_time(summary, args.format or "md"))
    return 0


def register(subparsers) -> None:
    group = subparsers.add_parser("tune", help="Grid-search fine-tuning protocol and reports")
    commands = group.add_subparsers(dest="command", metavar="COMMAND")

    parser = commands.add_parser("run", help="Run (or resume) the grid for one task")
    parser.add_argument("--task", choices=[t.value for t in Task])
    parser.add_argument("--trainer", choices=TrainerFactory.get_available_trainers())
    parser.add_argument("--data", help="Task data directory")
    parser.add_argument("--journal")
    parser.add_argument("--batch-sizes", help="Comma-separated, e.g. 16,32")
    parser.add_argument("--learning-rates", help="Comma-separated, e.g. 1e-5,2e-5")
    parser.add_argument("--max-epochs", type=int)
    parser.add_argument("--patience", type=int)
    parser.add_argument("--metric", choices=["micro_f1", "macro_f1"])
    parser.add_argument("--seed-mode", choices=list(SEED_MODES))
    parser.add_argument("--replicates", type=int)
    parser.add_argument("--model")
    parser.add_argument("--size-class")
    parser.add_argument("--tokenizer", help="Tokenizer directory: sizes sequences and feeds the probe trainer")
    parser.add_argument("--sequence-length", type=int, help="Override the measured length bucket")
    parser.add_argument("--features", type=int, help="Hashed feature count for the probe trainer")
    parser.add_argument("--full-evaluation", action="store_true", help="Score the test split in every grid trial")
    parser.set_defaults(handler=run_command, trainer_options=None)

    parser = commands.add_parser("report", help="Results or hyperparameter table from journals")
    parser.add_argument("--journal", nargs="+")
    parser.add_argument("--kind", choices=["results", "hyperparameters", "walltime"])
    parser.add_argument("--format", choices=["md", "csv"])
    parser.add_argument("--output")
    parser.set_defaults(handler=report_command)

    parser = commands.add_parser("walltime", help="Training time per task and in total (H:MM)")
    parser.add_argument("--journal", nargs="+")
    parser.add_argument("--format", choices=["md", "csv"])
    parser.set_defaults(handler=walltime_command)
