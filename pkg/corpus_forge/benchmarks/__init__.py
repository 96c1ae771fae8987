"""
評測資料模組

情感分類（TSV / CSV）與 token 級 NER（CoNLL）的載入、驗證與切分。
"""

from .conll import (
    BioViolation,
    TaggedSentence,
    find_violations,
    load_conll,
    load_conll_files,
    parse_conll,
    repair_bio,
    save_conll,
    validate_bio,
)
from .sentiment import (
    LABELS,
    LabeledText,
    LeakageReport,
    audit_leakage,
    deduplicate_samples,
    group_by_split,
    label_counts,
    load_sentiment,
    parse_label,
)
from .splits import SplitSpec, carve_validation, read_split, split_dataset, write_splits

__all__ = [
    'BioViolation',
    'TaggedSentence',
    'find_violations',
    'load_conll',
    'load_conll_files',
    'parse_conll',
    'repair_bio',
    'save_conll',
    'validate_bio',
    'LABELS',
    'LabeledText',
    'LeakageReport',
    'audit_leakage',
    'deduplicate_samples',
    'group_by_split',
    'label_counts',
    'load_sentiment',
    'parse_label',
    'SplitSpec',
    'carve_validation',
    'read_split',
    'split_dataset',
    'write_splits',
]
