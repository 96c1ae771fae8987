"""
預訓練預算估算

estimate_epochs：總步數 × 全域批次 × 序列長度 / 語料 token 數。
預設把 padding 計入消耗的 token；傳入 tokens_per_sequence（每列平均實際 token 數）
即可改為不計 padding 的算法。

count_parameters：RoBERTa 編碼器參數量（embedding、各層、pooler；LM head 與輸入 embedding 共用權重不另計）。
"""

import logging
from fractions import Fraction
from typing import Dict, Optional, Union

from pydantic import BaseModel, Field

from ..core.config import config_manager
from ..core.errors import AppException, ErrorCode
from ..metrics.scores import round_half_up, to_fraction

logger = logging.getLogger(__name__)


class BudgetSpec(BaseModel):
    total_steps: int = Field(gt=0)
    global_batch_sequences: int = Field(gt=0)
    sequence_length: int = Field(gt=0)
    corpus_tokens: int = Field(gt=0)

    @classmethod
    def default(cls, corpus_tokens: int) -> "BudgetSpec":
        return cls(corpus_tokens=corpus_tokens, **config_manager.get_constant("PRETRAIN_BUDGET"))

    @property
    def consumed_tokens(self) -> int:
        return self.total_steps * self.global_batch_sequences * self.sequence_length


def estimate_epochs(
    budget: BudgetSpec,
    tokens_per_sequence: Optional[Union[int, float, Fraction]] = None,
) -> Fraction:
    """
    語料被完整看過的次數

    Args:
        budget: 預算設定
        tokens_per_sequence: 每列實際 token 數；None 表示 padding 也計入（即 sequence_length）

    Returns:
        Fraction: 精確的 epoch 數
    """
    per_sequence = budget.sequence_length if tokens_per_sequence is None else to_fraction(tokens_per_sequence)
    if not 0 < per_sequence <= budget.sequence_length:
        raise AppException(
            ErrorCode.BUDGET_INVALID,
            message_en=f"tokens_per_sequence must lie in (0, {budget.sequence_length}], got {tokens_per_sequence}",
        )
    return Fraction(budget.total_steps * budget.global_batch_sequences) * per_sequence / budget.corpus_tokens


def corpus_tokens_for_epochs(
    epochs: Union[int, float, Fraction],
    total_steps: int,
    global_batch_sequences: int,
    sequence_length: int,
) -> int:
    """Corpus size (tokens) at which the given budget amounts to ``epochs`` passes."""
    epochs = to_fraction(epochs)
    if epochs <= 0:
        raise AppException(ErrorCode.BUDGET_INVALID, message_en=f"epochs must be positive, got {epochs}")
    return round_half_up(Fraction(total_steps * global_batch_sequences * sequence_length) / epochs)


def count_parameters(shape: Union[str, Dict[str, int]], vocab_size: int) -> Dict[str, int]:
    """
    Parameter count per component for an encoder shape.

    ``shape`` is a MODEL_SHAPES name ("base", "large") or a mapping with the
    same keys.
    """
    if isinstance(shape, str):
        try:
            shape = config_manager.get_model_shape(shape)
        except KeyError as e:
            raise AppException(ErrorCode.NOT_FOUND, message_en=f"unknown model shape {shape}") from e
    if vocab_size < 1:
        raise AppException(ErrorCode.BUDGET_INVALID, message_en=f"vocab_size must be positive, got {vocab_size}")
    hidden = shape["hidden_size"]
    inner = shape["intermediate_size"]
    layer_norm = 2 * hidden

    embeddings = (vocab_size + shape["max_positions"] + shape["type_vocab_size"]) * hidden + layer_norm
    attention = 4 * (hidden * hidden + hidden) + layer_norm
    feed_forward = hidden * inner + inner + inner * hidden + hidden + layer_norm
    layers = shape["num_layers"] * (attention + feed_forward)
    pooler = hidden * hidden + hidden if shape.get("with_pooler", True) else 0
    return {
        "embeddings": embeddings,
        "layers": layers,
        "pooler": pooler,
        "total": embeddings + layers + pooler,
    }
