"""
Configuration Management Module

Environment-driven defaults for every forge command, plus the resolved
per-run configuration that each command logs before doing any work.
"""

import json
import logging
import os
import tomllib
from pathlib import Path
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field

from ..errors.errors import AppException, ErrorCode

logger = logging.getLogger(__name__)

try:
    from dotenv import load_dotenv
    # Load environment-specific .env file
    project_root = Path(__file__).resolve().parents[3]
    env_type = os.getenv("ENV_TYPE", "development")

    env_file = project_root / f".env.{env_type}"
    if env_file.exists():
        load_dotenv(env_file, override=False)
        logger.debug(f"Loaded environment configuration from: {env_file}")
    else:
        default_env = project_root / ".env"
        if default_env.exists():
            load_dotenv(default_env, override=False)
            logger.debug(f"Loaded default configuration from: {default_env}")
except ImportError:
    # dotenv not installed – ignore
    pass


class Config:
    """
    Environment defaults for the forge toolchain
    """

    # Reproducibility
    SEED = int(os.getenv("FORGE_SEED", "20240229"))
    WORKERS = int(os.getenv("FORGE_WORKERS", str(os.cpu_count() or 1)))

    # Logging Configuration
    LOG_LEVEL = os.getenv("FORGE_LOG_LEVEL", "INFO")

    # Corpus pipeline
    SHARD_BYTES = int(os.getenv("FORGE_SHARD_BYTES", str(512 * 1024 * 1024)))

    # Tokenizer
    VOCAB_SIZE = int(os.getenv("FORGE_VOCAB_SIZE", "52000"))
    MIN_PAIR_FREQUENCY = int(os.getenv("FORGE_MIN_PAIR_FREQUENCY", "2"))

    # Pretraining prep
    SEQUENCE_LENGTH = int(os.getenv("FORGE_SEQUENCE_LENGTH", "512"))

    # Sequence bucketing
    BUCKET_STEP = int(os.getenv("FORGE_BUCKET_STEP", "64"))

    # Tuning harness
    JOURNAL_PATH = os.getenv("FORGE_JOURNAL_PATH", "runs/journal.jsonl")
    FULL_EVALUATION = os.getenv("FORGE_FULL_EVALUATION", "false").lower() == "true"

    @classmethod
    def get_defaults_summary(cls) -> dict:
        """
        Get a summary of the environment defaults

        Returns:
            dict: Configuration summary
        """
        return {
            "seed": cls.SEED,
            "workers": cls.WORKERS,
            "log_level": cls.LOG_LEVEL,
            "shard_bytes": cls.SHARD_BYTES,
            "vocab_size": cls.VOCAB_SIZE,
            "min_pair_frequency": cls.MIN_PAIR_FREQUENCY,
            "sequence_length": cls.SEQUENCE_LENGTH,
            "bucket_step": cls.BUCKET_STEP,
            "journal_path": cls.JOURNAL_PATH,
            "full_evaluation": cls.FULL_EVALUATION,
        }


class RunConfig(BaseModel):
    """Fully resolved configuration of one CLI invocation."""

    command: List[str]
    seed: int = Field(default_factory=lambda: Config.SEED)
    workers: int = Field(default_factory=lambda: Config.WORKERS, ge=1)
    log_level: str = Field(default_factory=lambda: Config.LOG_LEVEL)
    config_path: Optional[str] = None
    options: Dict[str, Any] = Field(default_factory=dict)
    version: str = ""


def load_config_file(path: Optional[str]) -> Dict[str, Any]:
    """
    Read a JSON or TOML configuration file.

    Args:
        path: File path; ``None`` yields an empty mapping.

    Returns:
        Dict[str, Any]: Parsed mapping.
    """
    if not path:
        return {}
    file_path = Path(path)
    try:
        raw = file_path.read_bytes()
    except OSError as e:
        raise AppException(ErrorCode.CONFIG_INVALID, message_en=f"cannot read config {path}: {e}") from e
    try:
        if file_path.suffix.lower() == ".toml":
            data = tomllib.loads(raw.decode("utf-8"))
        else:
            data = json.loads(raw.decode("utf-8"))
    except (ValueError, UnicodeDecodeError) as e:
        raise AppException(ErrorCode.CONFIG_INVALID, message_en=f"cannot parse config {path}: {e}") from e
    if not isinstance(data, dict):
        raise AppException(ErrorCode.CONFIG_INVALID, message_en=f"config {path} must be a mapping")
    logger.debug(f"Loaded config file: {path}")
    return data
