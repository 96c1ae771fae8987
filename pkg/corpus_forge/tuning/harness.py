"""
微調試驗流程

這個模組負責：
1. run_trial：逐 epoch 訓練，驗證分數連續 patience 個 epoch 未嚴格提升即停止
2. select_best：以最佳驗證分數挑選；同分時取較小 LR、較小 batch、較早的網格順序
3. run_grid：平行執行網格、依網格順序寫入日誌、跳過已完成的組合，
   最後對勝出組合做一次確認訓練，只有這次訓練的 test 分數會成為報表數字

每個 epoch 的學習率採用 10% warmup 的線性排程（總步數 = 每 epoch 步數 × max_epochs）。
"""

import logging
import math
import time
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Tuple, Union

from ..core.config import Config
from ..core.errors import AppException, ErrorCode, raise_operation_failed
from ..core.processing import ordered_map
from ..databases import TrialJournal
from ..pretrain.schedule import ScheduleSpec, finetune_schedule
from ..services.trainers import BaseTrainer, EpochContext, TrainerFactory
from .trial import StopReason, TaskData, TrialConfig, TrialRecord, TrialRole

logger = logging.getLogger(__name__)


def trial_schedule(config: TrialConfig, data: TaskData) -> Tuple[ScheduleSpec, int]:
    steps_per_epoch = max(1, math.ceil(len(data.train) / config.batch_size))
    spec = finetune_schedule(steps_per_epoch * config.max_epochs, config.learning_rate, config.warmup_fraction)
    return spec, steps_per_epoch


def run_trial(
    config: TrialConfig,
    trainer: BaseTrainer,
    data: TaskData,
    *,
    trial_index: int = 0,
    role: TrialRole = TrialRole.GRID,
    evaluate_test: bool = False,
) -> TrialRecord:
    """
    執行單一試驗

    Args:
        config: 試驗設定
        trainer: 訓練器
        data: 任務資料
        trial_index: 在網格中的位置
        role: grid 或 selected
        evaluate_test: 是否在最佳 epoch 的狀態上計算 test 分數

    Returns:
        TrialRecord: 訓練器失敗時 stop_reason 為 error 且沒有 test 分數
    """
    started = time.perf_counter()
    scores: List[float] = []
    best_valid: Optional[float] = None
    best_epoch = 0
    best_state = None
    stop_reason = StopReason.EPOCH_CAP
    test_score: Optional[float] = None
    error: Optional[str] = None

    try:
        schedule, steps_per_epoch = trial_schedule(config, data)
        state = trainer.init_state(config, data)
        stale = 0
        for epoch in range(1, config.max_epochs + 1):
            context = EpochContext(epoch, (epoch - 1) * steps_per_epoch, steps_per_epoch, schedule)
            state = trainer.train_one_epoch(state, config, data, context)
            score = float(trainer.evaluate(state, config, data, "valid"))
            scores.append(score)
            if best_valid is None or score > best_valid:
                best_valid, best_epoch, best_state, stale = score, epoch, state, 0
            else:
                stale += 1
                if stale >= config.patience:
                    stop_reason = StopReason.EARLY_STOP
                    break
        if evaluate_test and best_state is not None:
            test_score = float(trainer.evaluate(best_state, config, data, "test"))
    except Exception as e:
        logger.warning(
            f"Trial failed: task={config.task.value} bs={config.batch_size} lr={config.learning_rate} "
            f"epoch={len(scores) + 1} error={type(e).__name__}: {e}"
        )
        stop_reason = StopReason.ERROR
        best_valid, best_epoch, test_score = None, 0, None
        error = f"{type(e).__name__}: {e}"

    simulated = trainer.simulated_epoch_ms(config, data)
    if simulated is not None:
        wall_time_ms = simulated * len(scores)
    else:
        wall_time_ms = int(round((time.perf_counter() - started) * 1000))

    record = TrialRecord(
        config=config,
        config_hash=config.config_hash,
        role=role,
        trial_index=trial_index,
        trainer=trainer.trainer_name,
        metric=config.metric,
        per_epoch_valid_scores=scores,
        best_epoch=best_epoch,
        best_valid=best_valid,
        test_score=test_score,
        stop_reason=stop_reason,
        epochs_run=len(scores),
        wall_time_ms=wall_time_ms,
        error=error,
    )
    logger.info(
        f"Trial done: task={config.task.value} role={role.value} bs={config.batch_size} lr={config.learning_rate} "
        f"epochs={len(scores)} best_epoch={best_epoch} best_valid={best_valid} stop={stop_reason.value}"
    )
    return record


def select_best(records: Iterable[TrialRecord]) -> TrialRecord:
    """Highest best_valid; ties go to smaller LR, then smaller batch, then earlier grid position."""
    candidates = [r for r in records if r.succeeded]
    if not candidates:
        raise AppException(ErrorCode.NO_SUCCESSFUL_TRIAL, message_en="every trial failed or none ran")
    return min(
        candidates,
        key=lambda r: (-r.best_valid, r.config.learning_rate, r.config.batch_size, r.trial_index),
    )


@dataclass
class GridResult:
    records: List[TrialRecord]
    selected: TrialRecord
    new_trials: int


def _trial_task(task) -> TrialRecord:
    trainer, config, data, index, role, evaluate_test = task
    return run_trial(config, trainer, data, trial_index=index, role=role, evaluate_test=evaluate_test)


def run_grid(
    configs: Sequence[TrialConfig],
    trainer: Union[str, BaseTrainer],
    data: TaskData,
    journal: TrialJournal,
    *,
    trainer_options: Optional[dict] = None,
    workers: int = 1,
    full_evaluation: Optional[bool] = None,
) -> GridResult:
    """
    執行整個網格並挑出勝出組合

    已在日誌中的組合不會重跑；平行時以 workers 個試驗為一批，
    每批完成後依網格順序寫入日誌。
    """
    if not configs:
        raise AppException(ErrorCode.GRID_INVALID, message_en="grid has no trials")
    if isinstance(trainer, str):
        trainer = TrainerFactory.get_trainer(trainer, trainer_options)
    full = Config.FULL_EVALUATION if full_evaluation is None else full_evaluation
    if workers > 1 and not trainer.supports_concurrency:
        logger.info(f"Trainer {trainer.trainer_name} runs trials sequentially")
        workers = 1
    workers = max(1, workers)

    grid_role = TrialRole.GRID.value
    pending = [(i, c) for i, c in enumerate(configs) if not journal.has(c.config_hash, grid_role)]
    logger.info(f"Grid start: trials={len(configs)} pending={len(pending)} workers={workers}")

    new_trials = 0
    for start in range(0, len(pending), workers):
        chunk = pending[start : start + workers]
        tasks = [(trainer, config, data, index, TrialRole.GRID, full) for index, config in chunk]
        for record in ordered_map(_trial_task, tasks, workers):
            if journal.append(record.to_entry()):
                new_trials += 1

    records = [TrialRecord.from_entry(journal.get(c.config_hash, grid_role)) for c in configs]
    best = select_best(records)

    existing = journal.get(best.config_hash, TrialRole.SELECTED.value)
    if existing is not None:
        selected = TrialRecord.from_entry(existing)
    else:
        selected = run_trial(
            best.config,
            trainer,
            data,
            trial_index=best.trial_index,
            role=TrialRole.SELECTED,
            evaluate_test=True,
        )
        journal.append(selected.to_entry())
        new_trials += 1
    if not selected.succeeded:
        raise_operation_failed(
            "confirm the selected trial",
            ErrorCode.TRIAL_FAILED,
            selected.error,
            detail={"config_hash": selected.config_hash},
        )
    if selected.per_epoch_valid_scores != best.per_epoch_valid_scores:
        logger.warning(f"Confirmation run diverged from grid trial: config_hash={best.config_hash[:12]}")

    logger.info(
        f"Grid done: task={best.config.task.value} new_trials={new_trials} best_valid={best.best_valid} "
        f"bs={best.config.batch_size} lr={best.config.learning_rate} test={selected.test_score}"
    )
    return GridResult(records, selected, new_trials)
