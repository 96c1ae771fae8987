"""
預訓練前處理模組

序列打包、動態遮罩、學習率排程與訓練預算估算。
"""

from .budget import BudgetSpec, corpus_tokens_for_epochs, count_parameters, estimate_epochs
from .masking import (
    IGNORE_INDEX,
    MaskedSequence,
    Masker,
    MaskingPolicy,
    apply_masking,
    dump_masked_jsonl,
    iter_masked_batches,
    mask_batch,
)
from .packing import (
    PackedSequences,
    iter_packed,
    lengths_path,
    load_packed,
    npy_path,
    pack_sequences,
    pack_to_file,
    unpack,
)
from .schedule import (
    ScheduleKind,
    ScheduleSpec,
    finetune_schedule,
    lr_at,
    preset,
    schedule_rows,
    write_schedule_csv,
)

__all__ = [
    'BudgetSpec',
    'corpus_tokens_for_epochs',
    'count_parameters',
    'estimate_epochs',
    'IGNORE_INDEX',
    'MaskedSequence',
    'Masker',
    'MaskingPolicy',
    'apply_masking',
    'dump_masked_jsonl',
    'iter_masked_batches',
    'mask_batch',
    'PackedSequences',
    'iter_packed',
    'lengths_path',
    'load_packed',
    'npy_path',
    'pack_sequences',
    'pack_to_file',
    'unpack',
    'ScheduleKind',
    'ScheduleSpec',
    'finetune_schedule',
    'lr_at',
    'preset',
    'schedule_rows',
    'write_schedule_csv',
]
