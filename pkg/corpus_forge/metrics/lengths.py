"""
序列長度統計與 bucket 選擇

nearest-rank 百分位：排序後取第 ceil(p × n) 個值（1 起算）。
bucket 一律是 step（預設 64）的倍數：
  base = max(step, 進位到 step 倍數的「各分詞器 p95 最大值」)
  若全域最大長度進位後不超過 base + step，就延伸到該長度，否則維持 base。
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, List, Optional, Sequence

from ..core.config import Config
from ..core.errors import AppException, ErrorCode

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class LengthStats:
    max: int
    mean: Fraction
    p95: int
    count: int = 0

    def __post_init__(self):
        if self.p95 > self.max or self.mean > self.max:
            raise ValueError("p95 and mean must not exceed max")

    def to_dict(self):
        return {"max": self.max, "mean": float(self.mean), "p95": self.p95, "count": self.count}


def nearest_rank(values: Sequence[int], percent: int) -> int:
    ordered = sorted(values)
    rank = -(-percent * len(ordered) // 100)
    return ordered[max(rank, 1) - 1]


def length_stats(token_lengths: Iterable[int]) -> LengthStats:
    lengths = [int(n) for n in token_lengths]
    if not lengths:
        raise AppException(ErrorCode.METRIC_INPUT_EMPTY, message_en="length_stats needs at least one length")
    return LengthStats(
        max=max(lengths),
        mean=Fraction(sum(lengths), len(lengths)),
        p95=nearest_rank(lengths, 95),
        count=len(lengths),
    )


def round_up(value: int, step: int) -> int:
    return -(-value // step) * step


def select_bucket(per_tokenizer_stats: Sequence[LengthStats], step: Optional[int] = None) -> int:
    step = step or Config.BUCKET_STEP
    if not per_tokenizer_stats:
        raise AppException(ErrorCode.METRIC_INPUT_EMPTY, message_en="select_bucket needs at least one stats entry")
    base = max(step, round_up(max(s.p95 for s in per_tokenizer_stats), step))
    extended = round_up(max(s.max for s in per_tokenizer_stats), step)
    bucket = max(base, extended) if extended <= base + step else base
    logger.debug(f"Bucket selection: base={base} extended={extended} chosen={bucket}")
    return bucket


def measure_lengths(texts: Iterable[str], tokenizer, add_special_tokens: bool = True) -> List[int]:
    """Token count of every text; specials add the sentence-start and sentence-end tokens."""
    extra = 2 if add_special_tokens else 0
    return [len(sequence) + extra for sequence in tokenizer.encode_batch(texts)]
