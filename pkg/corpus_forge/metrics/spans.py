"""
NER span 評估

這個模組負責：
1. BIO 標籤與 span 集合之間的轉換
2. 跨全部句子彙總的 span micro-F1（完全相同的 start、end、type 才算命中）
3. 依實體類型平均的 span macro-F1
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, Sequence, Set, Tuple, Union

from ..core.errors import AppException, ErrorCode

logger = logging.getLogger(__name__)

OUTSIDE = "O"


@dataclass(frozen=True, order=True)
class SpanAnnotation:
    sentence_index: int
    start: int
    end: int
    entity_type: str

    def __post_init__(self):
        if not 0 <= self.start < self.end:
            raise ValueError(f"invalid span [{self.start}, {self.end})")


@dataclass(frozen=True)
class F1Score:
    """F1 with its confusion counts; ``degenerate`` marks empty-gold-and-empty-prediction inputs."""

    f1: Fraction
    precision: Fraction
    recall: Fraction
    true_positives: int
    gold_count: int
    predicted_count: int
    degenerate: bool = False
    per_type: Dict[str, Fraction] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, object]:
        return {
            "f1": float(self.f1),
            "precision": float(self.precision),
            "recall": float(self.recall),
            "true_positives": self.true_positives,
            "gold_count": self.gold_count,
            "predicted_count": self.predicted_count,
            "degenerate": self.degenerate,
            "per_type": {k: float(v) for k, v in sorted(self.per_type.items())},
        }


def split_tag(tag: str) -> Tuple[str, str]:
    """("B", "PER") for "B-PER", ("O", "") for "O"."""
    if tag == OUTSIDE:
        return OUTSIDE, ""
    prefix, sep, entity_type = tag.partition("-")
    if not sep or prefix not in ("B", "I") or not entity_type:
        raise AppException(ErrorCode.BIO_INVALID, message_en=f"Malformed BIO tag {tag!r}", detail={"tag": tag})
    return prefix, entity_type


def bio_to_spans(tags: Sequence[str], sentence_index: int = 0) -> Set[SpanAnnotation]:
    """
    Maximal same-type B..I runs become one span.

    An I-X that does not continue an X run opens a new span, so unrepaired
    input still yields well-formed spans.
    """
    spans: Set[SpanAnnotation] = set()
    start = None
    current = ""
    for position, tag in enumerate(tags):
        prefix, entity_type = split_tag(tag)
        continues = prefix == "I" and start is not None and entity_type == current
        if continues:
            continue
        if start is not None:
            spans.add(SpanAnnotation(sentence_index, start, position, current))
            start = None
        if prefix != OUTSIDE:
            start, current = position, entity_type
    if start is not None:
        spans.add(SpanAnnotation(sentence_index, start, len(tags), current))
    return spans


def spans_to_bio(spans: Iterable[SpanAnnotation], length: int) -> List[str]:
    tags = [OUTSIDE] * length
    for span in sorted(spans):
        if span.end > length:
            raise AppException(ErrorCode.METRIC_INPUT_MISALIGNED, message_en=f"span {span} exceeds sentence length {length}")
        if any(tags[i] != OUTSIDE for i in range(span.start, span.end)):
            raise AppException(ErrorCode.METRIC_INPUT_MISALIGNED, message_en=f"span {span} overlaps another span")
        tags[span.start] = f"B-{span.entity_type}"
        for i in range(span.start + 1, span.end):
            tags[i] = f"I-{span.entity_type}"
    return tags


SpanInput = Union[Sequence[Set[SpanAnnotation]], Sequence[Sequence[str]]]


def _as_span_sets(sentences: SpanInput) -> List[Set[SpanAnnotation]]:
    result = []
    for index, sentence in enumerate(sentences):
        if isinstance(sentence, (set, frozenset)):
            result.append({SpanAnnotation(index, s.start, s.end, s.entity_type) for s in sentence})
        else:
            result.append(bio_to_spans(list(sentence), index))
    return result


def _check_aligned(gold: SpanInput, predicted: SpanInput) -> None:
    if len(gold) != len(predicted):
        raise AppException(
            ErrorCode.METRIC_INPUT_MISALIGNED,
            message_en=f"gold has {len(gold)} sentences, predictions have {len(predicted)}",
            detail={"gold": len(gold), "predicted": len(predicted)},
        )
    for index, (g, p) in enumerate(zip(gold, predicted)):
        if not isinstance(g, (set, frozenset)) and not isinstance(p, (set, frozenset)) and len(g) != len(p):
            raise AppException(
                ErrorCode.METRIC_INPUT_MISALIGNED,
                message_en=f"sentence {index}: gold has {len(g)} tags, prediction has {len(p)}",
                detail={"sentence_index": index},
            )


def _f1(tp: int, gold: int, predicted: int) -> Tuple[Fraction, Fraction, Fraction]:
    precision = Fraction(tp, predicted) if predicted else Fraction(0)
    recall = Fraction(tp, gold) if gold else Fraction(0)
    if precision + recall == 0:
        return Fraction(0), precision, recall
    return 2 * precision * recall / (precision + recall), precision, recall


def micro_f1_spans(gold: SpanInput, predicted: SpanInput) -> F1Score:
    """
    Pooled exact-match span F1 over all sentences.

    Both arguments are per-sentence span sets or per-sentence BIO tag lists.
    Empty gold and empty predictions give 1 with ``degenerate`` set.
    """
    _check_aligned(gold, predicted)
    gold_sets = _as_span_sets(gold)
    pred_sets = _as_span_sets(predicted)
    tp = sum(len(g & p) for g, p in zip(gold_sets, pred_sets))
    gold_count = sum(len(g) for g in gold_sets)
    pred_count = sum(len(p) for p in pred_sets)
    if gold_count == 0 and pred_count == 0:
        logger.warning("Span F1 on empty gold and empty predictions; reporting 1.0 as degenerate")
        one = Fraction(1)
        return F1Score(one, one, one, 0, 0, 0, degenerate=True)
    f1, precision, recall = _f1(tp, gold_count, pred_count)
    return F1Score(f1, precision, recall, tp, gold_count, pred_count)


def macro_f1_spans(gold: SpanInput, predicted: SpanInput) -> F1Score:
    """Span F1 computed per entity type, then averaged without weights."""
    _check_aligned(gold, predicted)
    gold_spans = set().union(*_as_span_sets(gold)) if gold else set()
    pred_spans = set().union(*_as_span_sets(predicted)) if predicted else set()
    types = sorted({s.entity_type for s in gold_spans} | {s.entity_type for s in pred_spans})
    if not types:
        one = Fraction(1)
        return F1Score(one, one, one, 0, 0, 0, degenerate=True)
    per_type: Dict[str, Fraction] = {}
    for entity_type in types:
        g = {s for s in gold_spans if s.entity_type == entity_type}
        p = {s for s in pred_spans if s.entity_type == entity_type}
        per_type[entity_type] = _f1(len(g & p), len(g), len(p))[0]
    score = sum(per_type.values(), Fraction(0)) / len(types)
    _, precision, recall = _f1(len(gold_spans & pred_spans), len(gold_spans), len(pred_spans))
    return F1Score(
        score,
        precision,
        recall,
        len(gold_spans & pred_spans),
        len(gold_spans),
        len(pred_spans),
        per_type=per_type,
    )
