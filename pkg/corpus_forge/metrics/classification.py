"""
分類評估

macro-F1：每個類別各自計算 F1，再取不加權平均。
在 gold 中完全沒出現的類別 F1 記為 0，並列入 degenerate_classes。
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Sequence

from ..core.errors import AppException, ErrorCode

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ClassificationScore:
    macro_f1: Fraction
    per_class: List[Fraction]
    degenerate_classes: List[int] = field(default_factory=list)
    accuracy: Fraction = Fraction(0)
    support: List[int] = field(default_factory=list)

    @property
    def degenerate(self) -> bool:
        return bool(self.degenerate_classes)

    def to_dict(self) -> Dict[str, object]:
        return {
            "macro_f1": float(self.macro_f1),
            "per_class": [float(f) for f in self.per_class],
            "degenerate_classes": list(self.degenerate_classes),
            "accuracy": float(self.accuracy),
            "support": list(self.support),
        }


def confusion_matrix(gold: Sequence[int], predicted: Sequence[int], class_count: int) -> List[List[int]]:
    """Rows are gold classes, columns predicted classes."""
    matrix = [[0] * class_count for _ in range(class_count)]
    for g, p in zip(gold, predicted):
        matrix[g][p] += 1
    return matrix


def macro_f1(gold: Sequence[int], predicted: Sequence[int], class_count: int) -> ClassificationScore:
    if len(gold) != len(predicted):
        raise AppException(
            ErrorCode.METRIC_INPUT_MISALIGNED,
            message_en=f"gold has {len(gold)} labels, predictions have {len(predicted)}",
        )
    if not gold:
        raise AppException(ErrorCode.METRIC_INPUT_EMPTY, message_en="macro_f1 needs at least one label")
    for label in list(gold) + list(predicted):
        if not 0 <= label < class_count:
            raise AppException(
                ErrorCode.VALIDATION_ERROR,
                message_en=f"label {label} outside 0..{class_count - 1}",
                detail={"label": label, "class_count": class_count},
            )
    matrix = confusion_matrix(gold, predicted, class_count)
    per_class: List[Fraction] = []
    degenerate: List[int] = []
    support: List[int] = []
    for c in range(class_count):
        tp = matrix[c][c]
        fn = sum(matrix[c]) - tp
        fp = sum(row[c] for row in matrix) - tp
        support.append(tp + fn)
        if tp + fn == 0:
            degenerate.append(c)
        denominator = 2 * tp + fp + fn
        per_class.append(Fraction(2 * tp, denominator) if denominator else Fraction(0))
    if degenerate:
        logger.warning(f"Classes absent from gold labels score F1=0: {degenerate}")
    correct = sum(matrix[c][c] for c in range(class_count))
    return ClassificationScore(
        macro_f1=sum(per_class, Fraction(0)) / class_count,
        per_class=per_class,
        degenerate_classes=degenerate,
        accuracy=Fraction(correct, len(gold)),
        support=support,
    )
