"""
超參數網格

enumerate_grid 產生 batch size × learning rate 的笛卡兒積，順序固定為
batch 由小到大、同一 batch 內 learning rate 由小到大。

種子模式：
- shared：所有組合共用同一個種子（預設）
- per_config：每個組合由 (seed, batch, lr) 推導出自己的種子
replicates > 1 時每個組合再重複 k 次，replicate 編號寫進 TrialConfig。
"""

import hashlib
import logging
from typing import Iterable, List, Optional

from ..core.config import Config, config_manager
from ..core.errors import ErrorCode, raise_validation_error
from .trial import Task, TrialConfig

logger = logging.getLogger(__name__)

SEED_MODES = ("shared", "per_config")


def derive_seed(seed: int, *parts) -> int:
    material = ":".join(str(p) for p in (seed,) + parts).encode("utf-8")
    return int.from_bytes(hashlib.sha256(material).digest()[:4], "big")


def _sorted_unique(values: Iterable, field: str) -> list:
    values = sorted(set(values))
    if not values:
        raise_validation_error(field, f"{field} 不可為空", f"{field} must not be empty", ErrorCode.GRID_INVALID)
    if values[0] <= 0:
        raise_validation_error(field, f"{field} 必須為正數", f"{field} must be positive, got {values[0]}", ErrorCode.GRID_INVALID)
    return values


def enumerate_grid(
    batch_sizes: Iterable[int],
    learning_rates: Iterable[float],
    task,
    *,
    seed: Optional[int] = None,
    seed_mode: str = "shared",
    replicates: int = 1,
    **overrides,
) -> List[TrialConfig]:
    """
    Cartesian product of the grid for one task.

    ``overrides`` go straight into every TrialConfig (max_epochs, patience,
    warmup_fraction, sequence_length, metric, model, size_class). Passing
    ``data=`` lets a TaskData with a measured sequence_length size the trials.
    """
    batch_sizes = _sorted_unique(batch_sizes, "batch_sizes")
    learning_rates = _sorted_unique(learning_rates, "learning_rates")
    if seed_mode not in SEED_MODES:
        raise_validation_error("seed_mode", "未知的種子模式", f"seed_mode must be one of {SEED_MODES}", ErrorCode.GRID_INVALID)
    if replicates < 1:
        raise_validation_error("replicates", "重複次數至少為 1", "replicates must be at least 1", ErrorCode.GRID_INVALID)
    task = Task(task)
    base_seed = Config.SEED if seed is None else seed

    configs = []
    for batch_size in batch_sizes:
        for learning_rate in learning_rates:
            for replicate in range(replicates):
                if seed_mode == "shared":
                    trial_seed = base_seed if replicate == 0 else derive_seed(base_seed, replicate)
                else:
                    trial_seed = derive_seed(base_seed, batch_size, repr(learning_rate), replicate)
                configs.append(
                    TrialConfig.for_task(
                        task,
                        batch_size=batch_size,
                        learning_rate=learning_rate,
                        seed=trial_seed,
                        replicate=replicate,
                        **overrides,
                    )
                )
    logger.info(f"Enumerated grid: task={task.value} trials={len(configs)} seed_mode={seed_mode}")
    return configs


def default_grid(task, **kwargs) -> List[TrialConfig]:
    """The packaged grid: batch {16, 32} x five learning rates, 30 epochs, patience 3."""
    grid = config_manager.get_grid()
    kwargs.setdefault("max_epochs", grid["max_epochs"])
    kwargs.setdefault("patience", grid["patience"])
    kwargs.setdefault("warmup_fraction", grid["warmup_fraction"])
    return enumerate_grid(grid["batch_sizes"], grid["learning_rates"], task, **kwargs)
