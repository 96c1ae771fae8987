"""
檔案讀取模組
"""

from .parallel import ordered_map
from .corpus_reader import (
    RawRecord,
    detect_format,
    iter_jsonl_records,
    iter_plain_text_records,
    iter_records,
    canonical_json_line,
)

__all__ = [
    'RawRecord',
    'detect_format',
    'iter_jsonl_records',
    'iter_plain_text_records',
    'iter_records',
    'canonical_json_line',
    'ordered_map',
]
