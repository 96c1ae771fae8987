"""
動態遮罩

這個模組負責 MLM 訓練批次的遮罩，包括：
1. MaskingPolicy：選取機率與 mask / random / keep 三種替換比例（總和必須為 1）
2. Masker：對單一序列套用遮罩；特殊 token 與 padding 永不被選取
3. mask_batch / iter_masked_batches：以 (policy seed, epoch, 序列索引) 推導每列的亂數種子，
   平行產生時輸出仍依序且可重現
4. dump_masked_jsonl：把遮罩結果寫成 JSONL

每個 epoch 使用不同的 epoch 種子，因此同一序列在不同 epoch 的遮罩位置不同。
"""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, Field, model_validator

from ..core.config import Config, config_manager
from ..core.errors import raise_validation_error
from ..core.processing import canonical_json_line, ordered_map

logger = logging.getLogger(__name__)

IGNORE_INDEX = -100
WINDOW_BATCHES = 8


class MaskingPolicy(BaseModel):
    mask_probability: float = Field(0.15, ge=0.0, le=1.0)
    mask_token_share: float = Field(0.8, ge=0.0, le=1.0)
    random_token_share: float = Field(0.1, ge=0.0, le=1.0)
    keep_share: float = Field(0.1, ge=0.0, le=1.0)
    seed: int = Field(default_factory=lambda: Config.SEED, ge=0)

    @model_validator(mode="after")
    def _shares_sum_to_one(self):
        total = self.mask_token_share + self.random_token_share + self.keep_share
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"replacement shares must sum to 1, got {total}")
        return self

    @classmethod
    def default(cls, seed: Optional[int] = None) -> "MaskingPolicy":
        values = dict(config_manager.get_constant("MASKING"))
        if seed is not None:
            values["seed"] = seed
        return cls(**values)


@dataclass(frozen=True)
class MaskedSequence:
    input_ids: np.ndarray
    labels: np.ndarray
    target_positions: np.ndarray
    target_ids: np.ndarray

    def to_record(self) -> dict:
        return {
            "ids": self.input_ids.tolist(),
            "target_positions": self.target_positions.tolist(),
            "target_ids": self.target_ids.tolist(),
        }


class Masker:
    """
    Applies one MaskingPolicy over a fixed vocabulary.

    Random replacements draw uniformly from the non-special ids.
    """

    def __init__(self, policy: MaskingPolicy, vocab_size: int, mask_id: int, special_ids: Iterable[int]):
        self.policy = policy
        self.vocab_size = vocab_size
        self.mask_id = mask_id
        self.special_ids = np.array(sorted(set(int(i) for i in special_ids) | {mask_id}), dtype=np.int64)
        self.candidates = np.setdiff1d(np.arange(vocab_size, dtype=np.int64), self.special_ids)
        if self.candidates.size == 0:
            raise_validation_error("vocab_size", "詞表沒有可替換的一般 token", "vocabulary has no non-special ids")

    @classmethod
    def for_tokenizer(cls, policy: MaskingPolicy, tokenizer) -> "Masker":
        return cls(policy, tokenizer.vocab_size, tokenizer.mask_id, tokenizer.vocab.special_ids)

    def rng(self, epoch_seed: int, sequence_index: int) -> np.random.Generator:
        return np.random.default_rng([self.policy.seed, epoch_seed, sequence_index])

    def mask(self, sequence: Sequence[int], epoch_seed: int, sequence_index: int = 0) -> MaskedSequence:
        original = np.asarray(sequence, dtype=np.int64)
        rng = self.rng(epoch_seed, sequence_index)
        maskable = ~np.isin(original, self.special_ids)
        selected = (rng.random(original.shape[0]) < self.policy.mask_probability) & maskable
        positions = np.flatnonzero(selected)

        corrupted = original.copy()
        if positions.size:
            draw = rng.random(positions.size)
            to_mask = positions[draw < self.policy.mask_token_share]
            random_cut = self.policy.mask_token_share + self.policy.random_token_share
            to_random = positions[(draw >= self.policy.mask_token_share) & (draw < random_cut)]
            corrupted[to_mask] = self.mask_id
            corrupted[to_random] = self.candidates[rng.integers(0, self.candidates.size, size=to_random.size)]

        labels = np.full(original.shape[0], IGNORE_INDEX, dtype=np.int64)
        labels[positions] = original[positions]
        return MaskedSequence(corrupted, labels, positions, original[positions])


def apply_masking(
    sequence: Sequence[int],
    policy: MaskingPolicy,
    epoch_seed: int,
    *,
    vocab_size: int,
    mask_id: int,
    special_ids: Iterable[int],
    sequence_index: int = 0,
) -> MaskedSequence:
    return Masker(policy, vocab_size, mask_id, special_ids).mask(sequence, epoch_seed, sequence_index)


def mask_batch(
    masker: Masker,
    sequences: Union[np.ndarray, Sequence[Sequence[int]]],
    epoch_seed: int,
    start_index: int = 0,
) -> List[MaskedSequence]:
    return [masker.mask(row, epoch_seed, start_index + offset) for offset, row in enumerate(sequences)]


def _mask_chunk(task: Tuple[Masker, np.ndarray, int, int]) -> List[MaskedSequence]:
    masker, rows, epoch_seed, start = task
    return mask_batch(masker, rows, epoch_seed, start)


def iter_masked_batches(
    masker: Masker,
    sequences: np.ndarray,
    epochs: Sequence[int],
    batch_size: int,
    *,
    workers: int = 1,
) -> Iterator[Tuple[int, List[MaskedSequence]]]:
    """
    Yield (epoch, batch) pairs in epoch order, then row order.

    Each batch depends only on its rows, the epoch and the row indices, so
    the stream is identical for any worker count. ``sequences`` may be a
    memory-mapped array: only ``workers * WINDOW_BATCHES`` batches are read
    at a time.
    """
    if batch_size < 1:
        raise_validation_error("batch_size", "批次大小必須為正數", f"batch_size must be positive, got {batch_size}")
    window = batch_size * max(1, workers) * WINDOW_BATCHES
    total = len(sequences)
    for epoch in epochs:
        for window_start in range(0, total, window):
            window_end = min(window_start + window, total)
            tasks = [
                (masker, np.asarray(sequences[start : min(start + batch_size, window_end)]), epoch, start)
                for start in range(window_start, window_end, batch_size)
            ]
            for batch in ordered_map(_mask_chunk, tasks, workers):
                yield epoch, batch


def dump_masked_jsonl(batches: Iterable[Tuple[int, List[MaskedSequence]]], path: Union[str, Path]) -> int:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    written = 0
    with open(path, "wb") as handle:
        for epoch, batch in batches:
            for item in batch:
                record = {"epoch": epoch, **item.to_record()}
                handle.write(canonical_json_line(record))
                written += 1
    logger.info(f"Wrote masked sequences: path={path} rows={written}")
    return written
