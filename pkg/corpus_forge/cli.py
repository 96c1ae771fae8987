"""Command-line entry point for corpus_forge."""

from __future__ import annotations

import argparse
import logging
import sys
from typing import Any, Dict, List, Optional, Sequence

from . import __version__
from .commands import COMMAND_GROUPS
from .core.config import Config, RunConfig, load_config_file
from .core.errors import AppException, ErrorCode, handle_exception

logger = logging.getLogger(__name__)

GLOBAL_KEYS = ("seed", "workers", "log_level", "config")
INTERNAL_KEYS = ("handler", "group", "command")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="forge", description="Corpus, tokenizer and benchmark toolkit.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--config", help="JSON or TOML file with defaults for any flag")
    parser.add_argument("--seed", type=int, help="Global seed for every randomized step")
    parser.add_argument("--workers", type=int, help="Upper bound on parallel worker processes")
    parser.add_argument("--log-level", help="DEBUG, INFO, WARNING or ERROR")
    groups = parser.add_subparsers(dest="group", metavar="GROUP")
    for module in COMMAND_GROUPS:
        module.register(groups)
    return parser


def _file_defaults(args: argparse.Namespace, settings: Dict[str, Any]) -> None:
    """Fill unset flags from the config file: top level, then [group], then [group.command]."""
    layers = [settings]
    section = settings.get(args.group)
    if isinstance(section, dict):
        layers.append(section)
        command = section.get(args.command)
        if isinstance(command, dict):
            layers.append(command)
    for layer in layers:
        for key, value in layer.items():
            if isinstance(value, dict):
                continue
            name = key.replace("-", "_")
            if hasattr(args, name) and getattr(args, name) in (None, False):
                setattr(args, name, value)


def resolve_run_config(args: argparse.Namespace, argv: Sequence[str]) -> RunConfig:
    _file_defaults(args, load_config_file(args.config))
    options = {
        key: value
        for key, value in vars(args).items()
        if key not in GLOBAL_KEYS + INTERNAL_KEYS and value is not None
    }
    values: Dict[str, Any] = {
        "command": [args.group, args.command],
        "config_path": args.config,
        "options": options,
        "version": __version__,
    }
    for key in ("seed", "workers", "log_level"):
        if getattr(args, key) is not None:
            values[key] = getattr(args, key)
    try:
        return RunConfig(**values)
    except ValueError as e:
        raise AppException(ErrorCode.USAGE_ERROR, message_en=str(e), detail={"argv": list(argv)}) from e


def configure_logging(level: str) -> None:
    logging.basicConfig(
        level=getattr(logging, str(level).upper(), logging.INFO),
        stream=sys.stderr,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        force=True,
    )


def dispatch(argv: Optional[List[str]] = None) -> int:
    """
    解析參數並執行子命令

    Returns:
        int: 0 表示成功；參數錯誤為 2；其餘錯誤依 ErrorCode 的 exit code
    """
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else 2
    if getattr(args, "handler", None) is None:
        parser.print_usage(sys.stderr)
        return ErrorCode.USAGE_ERROR.exit_code

    try:
        run = resolve_run_config(args, argv)
        configure_logging(run.log_level)
        logger.info(f"forge {__version__} run config: {run.model_dump_json()}")
        logger.info(f"Seed: {run.seed} workers={run.workers}")
        logger.debug(f"Environment defaults: {Config.get_defaults_summary()}")
        return int(args.handler(args, run) or 0)
    except Exception as e:
        return handle_exception(e)


def main() -> None:
    sys.exit(dispatch())


if __name__ == "__main__":
    main()
