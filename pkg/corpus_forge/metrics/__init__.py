"""
評估指標模組

span micro / macro F1、分類 macro-F1、perplexity、序列長度統計與 bucket 選擇。
所有函式皆為純函式，可同時在多個試驗中使用。
"""

from .classification import ClassificationScore, confusion_matrix, macro_f1
from .lengths import LengthStats, length_stats, measure_lengths, nearest_rank, round_up, select_bucket
from .perplexity import CurveSummary, perplexity, summarize_curve
from .scores import as_percentage, format_score, round_half_up, to_fraction, unweighted_mean
from .spans import F1Score, SpanAnnotation, bio_to_spans, macro_f1_spans, micro_f1_spans, spans_to_bio, split_tag

__all__ = [
    'ClassificationScore',
    'confusion_matrix',
    'macro_f1',
    'LengthStats',
    'length_stats',
    'measure_lengths',
    'nearest_rank',
    'round_up',
    'select_bucket',
    'CurveSummary',
    'perplexity',
    'summarize_curve',
    'as_percentage',
    'format_score',
    'round_half_up',
    'to_fraction',
    'unweighted_mean',
    'F1Score',
    'SpanAnnotation',
    'bio_to_spans',
    'macro_f1_spans',
    'micro_f1_spans',
    'spans_to_bio',
    'split_tag',
]
