"""
微調評測模組 (Tuning Module)

- trial.py：TrialConfig / TrialRecord / TaskData
- grid.py：超參數網格與種子模式
- data.py：三個評測任務的資料載入
- harness.py：early stopping、挑選、可續跑的網格執行
- report.py：結果表、超參數表、訓練時間
"""

from .data import discover_task_files, load_task_data, measure_sequence_length
from .grid import SEED_MODES, default_grid, derive_seed, enumerate_grid
from .harness import GridResult, run_grid, run_trial, select_best, trial_schedule
from .report import (
    ResultsTable,
    WallTimeSummary,
    build_results_table,
    emit_report,
    format_duration,
    format_learning_rate,
    load_records,
    rank_marks,
    render_hyperparameters,
    render_results,
    render_wall_time,
    track_wall_time,
)
from .trial import TASK_ORDER, StopReason, Task, TaskData, TrialConfig, TrialRecord, TrialRole

__all__ = [
    'Task',
    'TASK_ORDER',
    'StopReason',
    'TrialRole',
    'TrialConfig',
    'TrialRecord',
    'TaskData',
    'SEED_MODES',
    'derive_seed',
    'enumerate_grid',
    'default_grid',
    'discover_task_files',
    'load_task_data',
    'measure_sequence_length',
    'trial_schedule',
    'run_trial',
    'select_best',
    'run_grid',
    'GridResult',
    'ResultsTable',
    'WallTimeSummary',
    'build_results_table',
    'rank_marks',
    'render_results',
    'render_hyperparameters',
    'format_learning_rate',
    'track_wall_time',
    'format_duration',
    'render_wall_time',
    'load_records',
    'emit_report',
]
