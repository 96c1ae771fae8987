"""
線性探針訓練器

以 hashed bag-of-subwords 特徵訓練多類別 logistic regression，讓整條微調流程
能在單機上跑出真實（但有限）的分數：
1. 分類任務：每個樣本一列，特徵為 BPE token id（截斷到 sequence_length）
2. 標註任務：每個 token 一列，特徵為詞本身、前後詞、前後綴與其 BPE token id
3. 以 minibatch SGD 訓練，每一步的學習率取自試驗的 warmup + 線性衰減排程

網格中的學習率是為大型編碼器微調設計的，探針會乘上 lr_multiplier（預設 2000）。
"""

import hashlib
import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from ...metrics import macro_f1, macro_f1_spans, micro_f1_spans
from .base import BaseTrainer, EpochContext

logger = logging.getLogger(__name__)

DEFAULT_FEATURES = 1 << 14
DEFAULT_LR_MULTIPLIER = 2000.0
EVAL_CHUNK = 4096


@lru_cache(maxsize=1 << 20)
def feature_index(feature: str, dim: int) -> int:
    digest = hashlib.blake2b(feature.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "big") % dim


@dataclass(frozen=True)
class FeatureRows:
    """
    Fixed-width sparse rows. Unused slots point at index ``dim`` with value 0.

    Sample ``i`` owns rows ``offsets[i]:offsets[i + 1]`` (one row for a
    sentence label, one row per token for tagging).
    """

    indices: np.ndarray
    values: np.ndarray
    labels: np.ndarray
    offsets: np.ndarray

    @property
    def sample_count(self) -> int:
        return len(self.offsets) - 1

    def rows_for(self, samples: np.ndarray) -> np.ndarray:
        return np.concatenate([np.arange(self.offsets[s], self.offsets[s + 1]) for s in samples])


@dataclass
class ProbeState:
    weights: np.ndarray
    bias: np.ndarray
    features: Dict[str, FeatureRows]


def _pack(rows: List[Dict[int, float]], labels: List[int], offsets: List[int], dim: int) -> FeatureRows:
    width = max((len(r) for r in rows), default=1) or 1
    indices = np.full((len(rows), width), dim, dtype=np.int64)
    values = np.zeros((len(rows), width), dtype=np.float64)
    for i, row in enumerate(rows):
        if not row:
            continue
        keys = sorted(row)
        weights = np.array([row[k] for k in keys], dtype=np.float64)
        indices[i, : len(keys)] = keys
        values[i, : len(keys)] = weights / np.linalg.norm(weights)
    return FeatureRows(indices, values, np.asarray(labels, dtype=np.int64), np.asarray(offsets, dtype=np.int64))


def _softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=1, keepdims=True)


class ProbeTrainer(BaseTrainer):
    def __init__(self, options: Optional[Dict[str, Any]] = None):
        super().__init__(options)
        self.dim = int(self.get_option("features", DEFAULT_FEATURES))
        self.lr_multiplier = float(self.get_option("lr_multiplier", DEFAULT_LR_MULTIPLIER))
        self._tokenizer = None
        self._cache: Dict[Tuple[int, int], Tuple[Any, Dict[str, FeatureRows]]] = {}

    def __getstate__(self):
        # Worker processes rebuild features and the tokenizer on first use.
        state = self.__dict__.copy()
        state["_tokenizer"] = None
        state["_cache"] = {}
        return state

    @property
    def trainer_name(self) -> str:
        return "probe"

    @property
    def tokenizer(self):
        path = self.get_option("tokenizer")
        if self._tokenizer is None and path:
            from ...tokenizer import load_tokenizer

            self._tokenizer = load_tokenizer(path)
            logger.info(f"Probe trainer loaded tokenizer: {path}")
        return self._tokenizer

    # ==================== features ====================

    def _units(self, text: str, limit: int) -> List[str]:
        if self.tokenizer is not None:
            return [f"t{i}" for i in self.tokenizer.encode_ids(text)[:limit]]
        return [f"w{w}" for w in text.split()[:limit]]

    def _sentence_rows(self, samples: Sequence[Any], limit: int) -> Tuple[List[Dict[int, float]], List[int]]:
        rows, labels = [], []
        for sample in samples:
            counts: Dict[int, float] = {}
            for unit in self._units(sample.text, limit):
                index = feature_index(unit, self.dim)
                counts[index] = counts.get(index, 0.0) + 1.0
            rows.append({k: math.log1p(v) for k, v in counts.items()})
            labels.append(int(sample.label))
        return rows, labels

    def _token_rows(self, sentences: Sequence[Any], tag_index: Dict[str, int]) -> Tuple[List[Dict[int, float]], List[int], List[int]]:
        rows, labels, offsets = [], [], [0]
        for sentence in sentences:
            tokens = sentence.tokens
            for position, token in enumerate(tokens):
                previous = tokens[position - 1] if position else "<s>"
                following = tokens[position + 1] if position + 1 < len(tokens) else "</s>"
                names = [f"w={token}", f"p={previous}", f"n={following}", f"f={token[:2]}", f"x={token[-2:]}"]
                names.extend(f"s{unit}" for unit in self._units(token, len(token.encode("utf-8"))))
                row: Dict[int, float] = {}
                for name in names:
                    row[feature_index(name, self.dim)] = 1.0
                rows.append(row)
                labels.append(tag_index[sentence.tags[position]])
            offsets.append(len(rows))
        return rows, labels, offsets

    def _features(self, config, data) -> Dict[str, FeatureRows]:
        key = (id(data), config.sequence_length)
        cached = self._cache.get(key)
        if cached is not None and cached[0] is data:
            return cached[1]
        features = {}
        for split in ("train", "valid", "test"):
            samples = data.split(split)
            if config.task.is_tagging:
                tag_index = {tag: i for i, tag in enumerate(data.labels)}
                rows, labels, offsets = self._token_rows(samples, tag_index)
            else:
                rows, labels = self._sentence_rows(samples, config.sequence_length)
                offsets = list(range(len(rows) + 1))
            features[split] = _pack(rows, labels, offsets, self.dim)
        self._cache = {key: (data, features)}
        logger.debug(f"Probe features built: task={config.task.value} train_rows={len(features['train'].labels)}")
        return features

    # ==================== contract ====================

    def init_state(self, config, data) -> ProbeState:
        classes = len(data.labels)
        return ProbeState(
            weights=np.zeros((self.dim + 1, classes), dtype=np.float64),
            bias=np.zeros(classes, dtype=np.float64),
            features=self._features(config, data),
        )

    def _logits(self, state: ProbeState, indices: np.ndarray, values: np.ndarray) -> np.ndarray:
        return np.einsum("bk,bkc->bc", values, state.weights[indices]) + state.bias

    def train_one_epoch(self, state: ProbeState, config, data, context: EpochContext) -> ProbeState:
        rows = state.features["train"]
        weights = state.weights.copy()
        bias = state.bias.copy()
        current = ProbeState(weights, bias, state.features)
        classes = weights.shape[1]
        order = np.random.default_rng([config.seed, config.replicate, context.epoch]).permutation(rows.sample_count)
        for step, start in enumerate(range(0, rows.sample_count, config.batch_size)):
            batch = rows.rows_for(order[start : start + config.batch_size])
            indices, values = rows.indices[batch], rows.values[batch]
            grad = _softmax(self._logits(current, indices, values))
            grad[np.arange(len(batch)), rows.labels[batch]] -= 1.0
            grad /= len(batch)
            lr = context.lr(step) * self.lr_multiplier
            update = (values[:, :, None] * grad[:, None, :]).reshape(-1, classes)
            np.add.at(weights, indices.ravel(), -lr * update)
            bias -= lr * grad.sum(axis=0)
        return current

    def predict(self, state: ProbeState, split: str) -> np.ndarray:
        rows = state.features[split]
        predictions = []
        for start in range(0, len(rows.labels), EVAL_CHUNK):
            chunk = slice(start, start + EVAL_CHUNK)
            predictions.append(np.argmax(self._logits(state, rows.indices[chunk], rows.values[chunk]), axis=1))
        return np.concatenate(predictions) if predictions else np.zeros(0, dtype=np.int64)

    def evaluate(self, state: ProbeState, config, data, split: str) -> float:
        rows = state.features[split]
        predicted = self.predict(state, split)
        if not config.task.is_tagging:
            return float(macro_f1(rows.labels.tolist(), predicted.tolist(), len(data.labels)).macro_f1)
        gold_tags, pred_tags = [], []
        for s in range(rows.sample_count):
            lo, hi = int(rows.offsets[s]), int(rows.offsets[s + 1])
            gold_tags.append([data.labels[i] for i in rows.labels[lo:hi]])
            pred_tags.append([data.labels[i] for i in predicted[lo:hi]])
        scorer = macro_f1_spans if config.metric == "macro_f1" else micro_f1_spans
        return float(scorer(gold_tags, pred_tags).f1)
