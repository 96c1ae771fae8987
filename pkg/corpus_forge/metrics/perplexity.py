"""Perplexity and training-curve summaries."""

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

from ..core.errors import AppException, ErrorCode


def perplexity(negative_log_likelihoods: Sequence[float]) -> float:
    """
    exp(mean natural-log NLL over masked positions).

    ``math.fsum`` is exactly rounded, so the result does not depend on the
    order of the losses.
    """
    values = list(negative_log_likelihoods)
    if not values:
        raise AppException(ErrorCode.METRIC_INPUT_EMPTY, message_en="perplexity needs at least one loss value")
    for value in values:
        if not math.isfinite(value) or value < 0:
            raise AppException(
                ErrorCode.VALIDATION_ERROR,
                message_en=f"negative log-likelihoods must be finite and non-negative, got {value}",
            )
    return math.exp(math.fsum(values) / len(values))


@dataclass(frozen=True)
class CurveSummary:
    final: float
    minimum: float
    minimum_step: int
    convergence_step: Optional[int]
    spikes: List[int] = field(default_factory=list)


def summarize_curve(
    points: Sequence[Tuple[int, float]],
    tolerance: float = 0.05,
    spike_ratio: float = 1.1,
) -> CurveSummary:
    """
    描述 perplexity 曲線

    - convergence_step：之後所有點都落在最終值 ±tolerance（相對）內的第一個 step
    - spikes：比前一點高出 spike_ratio 倍、且下一點立即回落的 step（短暫上衝）
    """
    if not points:
        raise AppException(ErrorCode.METRIC_INPUT_EMPTY, message_en="curve has no points")
    ordered = sorted(points)
    steps = [int(s) for s, _ in ordered]
    values = [float(v) for _, v in ordered]
    final = values[-1]
    band = abs(final) * tolerance
    convergence = None
    for i in range(len(values) - 1, -1, -1):
        if abs(values[i] - final) > band:
            break
        convergence = steps[i]
    spikes = [
        steps[i]
        for i in range(1, len(values) - 1)
        if values[i] > values[i - 1] * spike_ratio and values[i + 1] < values[i]
    ]
    low = min(range(len(values)), key=lambda i: (values[i], steps[i]))
    return CurveSummary(final, values[low], steps[low], convergence, spikes)
