"""
BPE 詞表訓練

這個模組負責從語料訓練 byte-level BPE，負責：
1. 平行統計每個分片的 pre-token 頻率，再依分片順序加總
2. 以 pre-token 頻率表（而非重新掃描原始文字）維護相鄰符號對的次數
3. 每輪合併全域最高頻的符號對；同頻時取 (left, right) 字典序最小者
4. 達到 vocab_size、最高頻低於 min_pair_frequency 或已無符號對時停止

合併後的字串若已存在於詞表（不同符號對拼出同一字串），該符號對不合併也不記錄，
因此詞表大小恆為 特殊 token + 256 + 合併數。會拼出特殊 token 字串的符號對永遠不合併。
"""

import hashlib
import heapq
import json
import logging
from collections import Counter, defaultdict
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Set, Tuple

from ..core.config import Config, config_manager
from ..core.errors import AppException, ErrorCode, raise_validation_error
from ..core.processing import ordered_map
from ..corpus.documents import CorpusManifest
from .alphabet import ByteAlphabet, default_alphabet
from .bpe import ByteLevelBPETokenizer
from .pretokenizer import pre_split
from .vocab import MergeTable, Pair, Vocabulary

logger = logging.getLogger(__name__)

PROGRESS_EVERY = 1000


@dataclass
class TrainingResult:
    merges: MergeTable
    vocab: Vocabulary
    truncated: bool = False
    min_pair_frequency: int = 2
    requested_vocab_size: int = 0
    corpus_fingerprint: str = ""
    pre_token_types: int = 0
    pre_token_count: int = 0
    corpus_bytes: int = 0

    @property
    def tokenizer(self) -> ByteLevelBPETokenizer:
        return ByteLevelBPETokenizer(self.merges, self.vocab)


# ==================== pre-token counting ====================

def count_pre_tokens(texts: Iterable[str], alphabet: Optional[ByteAlphabet] = None) -> Counter:
    """Frequency table of pre-tokens, each already mapped to byte symbols."""
    alphabet = alphabet or default_alphabet()
    counts: Counter = Counter()
    for text in texts:
        counts.update(pre_split(text))
    return Counter({alphabet.encode(piece.encode("utf-8")): n for piece, n in counts.items()})


def _count_shard(path: str) -> Tuple[Counter, str, int]:
    digest = hashlib.blake2b(digest_size=16)
    counts: Counter = Counter()
    total = 0
    with open(path, "rb") as handle:
        for line in handle:
            if not line.strip():
                continue
            text = json.loads(line)["text"]
            data = text.encode("utf-8")
            digest.update(len(data).to_bytes(8, "big"))
            digest.update(data)
            total += len(data)
            counts.update(pre_split(text))
    alphabet = default_alphabet()
    mapped = Counter({alphabet.encode(piece.encode("utf-8")): n for piece, n in counts.items()})
    return mapped, digest.hexdigest(), total


# ==================== merge loop ====================

def _merge_word(word: List[str], left: str, right: str) -> Optional[List[str]]:
    merged: List[str] = []
    i = 0
    changed = False
    while i < len(word):
        if i < len(word) - 1 and word[i] == left and word[i + 1] == right:
            merged.append(left + right)
            i += 2
            changed = True
        else:
            merged.append(word[i])
            i += 1
    return merged if changed else None


def learn_merges(
    word_counts: Dict[str, int],
    vocab_size: int,
    min_pair_frequency: int,
    alphabet: Optional[ByteAlphabet] = None,
) -> Tuple[List[Pair], List[str]]:
    """
    貪婪 BPE 合併

    Args:
        word_counts: 以位元組符號表示的 pre-token 頻率
        vocab_size: 含特殊 token 的目標詞表大小
        min_pair_frequency: 可合併的最低頻率

    Returns:
        (merges, merged_tokens): 合併規則（依序）與新增 token（依建立順序）
    """
    alphabet = alphabet or default_alphabet()
    forbidden = {token for _, token in config_manager.get_special_tokens()}
    known: Set[str] = set(alphabet.byte_to_symbol) | forbidden
    token_count = len(known)

    words: List[List[str]] = []
    freqs: List[int] = []
    for word in sorted(word_counts):
        words.append(list(word))
        freqs.append(word_counts[word])

    pair_counts: Dict[Pair, int] = defaultdict(int)
    where: Dict[Pair, Set[int]] = defaultdict(set)
    for index, (word, freq) in enumerate(zip(words, freqs)):
        for pair in zip(word, word[1:]):
            pair_counts[pair] += freq
            where[pair].add(index)

    heap = [(-count, pair[0], pair[1]) for pair, count in pair_counts.items()]
    heapq.heapify(heap)
    banned: Set[Pair] = set()
    merges: List[Pair] = []
    merged_tokens: List[str] = []

    while token_count < vocab_size and heap:
        neg_count, left, right = heapq.heappop(heap)
        pair = (left, right)
        count = -neg_count
        if pair in banned or pair_counts.get(pair, 0) != count:
            continue
        if count < min_pair_frequency:
            break
        new_token = left + right
        if new_token in forbidden or new_token in known:
            banned.add(pair)
            continue

        merges.append(pair)
        known.add(new_token)
        merged_tokens.append(new_token)
        token_count += 1

        touched: Set[Pair] = set()
        for index in where.pop(pair, ()):
            word = words[index]
            merged = _merge_word(word, left, right)
            if merged is None:
                continue
            freq = freqs[index]
            for old in zip(word, word[1:]):
                pair_counts[old] -= freq
                touched.add(old)
            for new in zip(merged, merged[1:]):
                pair_counts[new] += freq
                where[new].add(index)
                touched.add(new)
            words[index] = merged
        for changed in touched:
            current = pair_counts.get(changed, 0)
            if current > 0:
                heapq.heappush(heap, (-current, changed[0], changed[1]))
            else:
                pair_counts.pop(changed, None)
                where.pop(changed, None)

        if len(merges) % PROGRESS_EVERY == 0:
            logger.info(f"BPE progress: merges={len(merges)} tokens={token_count} last_count={count}")

    return merges, merged_tokens


def _validate(vocab_size: int, min_pair_frequency: int) -> None:
    floor = 256 + len(config_manager.get_special_tokens())
    if vocab_size <= floor:
        raise_validation_error(
            "vocab_size",
            f"詞表大小必須大於 {floor}",
            f"vocab_size must exceed {floor}, got {vocab_size}",
            ErrorCode.VOCAB_SIZE_INVALID,
        )
    if min_pair_frequency < 1:
        raise_validation_error(
            "min_pair_frequency",
            "最低合併頻率必須至少為 1",
            f"min_pair_frequency must be at least 1, got {min_pair_frequency}",
            ErrorCode.VALIDATION_ERROR,
        )


def _finish(
    word_counts: Counter,
    vocab_size: int,
    min_pair_frequency: int,
    fingerprint: str,
    corpus_bytes: int,
) -> TrainingResult:
    if not word_counts:
        raise AppException(ErrorCode.CORPUS_EMPTY, message_en="Training corpus contains no text")
    merges, merged_tokens = learn_merges(word_counts, vocab_size, min_pair_frequency)
    vocab = Vocabulary.build(merged_tokens)
    truncated = vocab.size < vocab_size
    if truncated:
        logger.warning(f"Corpus too small for vocab_size={vocab_size}; trained vocabulary has {vocab.size} tokens")
    logger.info(f"BPE trained: vocab_size={vocab.size} merges={len(merges)} pre_token_types={len(word_counts)}")
    return TrainingResult(
        merges=MergeTable(tuple(merges)),
        vocab=vocab,
        truncated=truncated,
        min_pair_frequency=min_pair_frequency,
        requested_vocab_size=vocab_size,
        corpus_fingerprint=fingerprint,
        pre_token_types=len(word_counts),
        pre_token_count=sum(word_counts.values()),
        corpus_bytes=corpus_bytes,
    )


def train(
    corpus: CorpusManifest,
    vocab_size: Optional[int] = None,
    min_pair_frequency: Optional[int] = None,
    *,
    workers: int = 1,
) -> TrainingResult:
    """
    從語料清單訓練 BPE 詞表

    pre-token 統計在分片之間平行進行，合併迴圈為單執行緒；
    結果與 worker 數量無關。
    """
    vocab_size = vocab_size or Config.VOCAB_SIZE
    min_pair_frequency = min_pair_frequency if min_pair_frequency is not None else Config.MIN_PAIR_FREQUENCY
    _validate(vocab_size, min_pair_frequency)
    if corpus.document_count == 0:
        raise AppException(ErrorCode.CORPUS_EMPTY, message_en="Training corpus has no documents")

    paths = [str(corpus.resolve_shard(s)) for s in corpus.shards]
    partials = ordered_map(_count_shard, paths, workers)
    word_counts: Counter = Counter()
    digest = hashlib.sha256()
    corpus_bytes = 0
    for counts, shard_digest, shard_bytes in partials:
        word_counts.update(counts)
        digest.update(shard_digest.encode("ascii"))
        corpus_bytes += shard_bytes
    logger.info(f"Counted pre-tokens: shards={len(paths)} bytes={corpus_bytes} types={len(word_counts)}")
    return _finish(word_counts, vocab_size, min_pair_frequency, digest.hexdigest(), corpus_bytes)


def train_from_iterator(
    texts: Iterable[str],
    vocab_size: int,
    min_pair_frequency: int = 2,
) -> TrainingResult:
    """In-memory variant of :func:`train` for small corpora and tests."""
    _validate(vocab_size, min_pair_frequency)
    texts = list(texts)
    digest = hashlib.sha256()
    corpus_bytes = 0
    for text in texts:
        data = text.encode("utf-8")
        digest.update(len(data).to_bytes(8, "big"))
        digest.update(data)
        corpus_bytes += len(data)
    return _finish(count_pre_tokens(texts), vocab_size, min_pair_frequency, digest.hexdigest(), corpus_bytes)
