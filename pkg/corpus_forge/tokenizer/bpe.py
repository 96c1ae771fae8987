"""
Byte-level BPE 編碼器

這個模組負責把文字轉成 token id 以及反向還原，包括：
1. 以 pre-splitter 切片，將每個片段轉為位元組符號
2. 反覆套用 rank 最低的合併規則
3. 產生每個 token 在原始 UTF-8 位元組串中的位置
4. 解碼（特殊 token 解碼為空字串）

編碼器本身是唯讀的，可以在多個 worker 間共用。
"""

import logging
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple, Union

from ..core.errors import AppException, ErrorCode
from .alphabet import ByteAlphabet, default_alphabet
from .pretokenizer import pre_split
from .vocab import MergeTable, TokenSequence, Vocabulary

logger = logging.getLogger(__name__)

CACHE_LIMIT = 100_000


def _to_text(text: Union[str, bytes]) -> str:
    """Reject invalid UTF-8 at the boundary: undecodable bytes or lone surrogates."""
    try:
        if isinstance(text, (bytes, bytearray)):
            return bytes(text).decode("utf-8")
        text.encode("utf-8")
        return text
    except (UnicodeDecodeError, UnicodeEncodeError) as e:
        raise AppException(ErrorCode.INVALID_UTF8, detail={"error": str(e)}) from e


class ByteLevelBPETokenizer:
    """
    MergeTable + Vocabulary bundle with a piece cache.

    Usage:
        tokenizer = ByteLevelBPETokenizer(merges, vocab)
        seq = tokenizer.encode("שלום עולם")
        assert tokenizer.decode(seq.ids) == "שלום עולם"
    """

    def __init__(self, merges: MergeTable, vocab: Vocabulary, alphabet: Optional[ByteAlphabet] = None):
        self.merges = merges
        self.vocab = vocab
        self.alphabet = alphabet or default_alphabet()
        self._cache: Dict[str, Tuple[int, ...]] = {}

    # ==================== special tokens ====================

    @property
    def bos_id(self) -> int:
        return self.vocab.special_id("bos")

    @property
    def eos_id(self) -> int:
        return self.vocab.special_id("eos")

    @property
    def pad_id(self) -> int:
        return self.vocab.special_id("pad")

    @property
    def mask_id(self) -> int:
        return self.vocab.special_id("mask")

    @property
    def vocab_size(self) -> int:
        return self.vocab.size

    # ==================== encode ====================

    def _merge_piece(self, symbols: str) -> List[str]:
        rank = self.merges.rank
        word = list(symbols)
        while len(word) > 1:
            best = None
            best_rank = None
            for pair in zip(word, word[1:]):
                r = rank.get(pair)
                if r is not None and (best_rank is None or r < best_rank):
                    best, best_rank = pair, r
            if best is None:
                break
            left, right = best
            merged: List[str] = []
            i = 0
            while i < len(word):
                if i < len(word) - 1 and word[i] == left and word[i + 1] == right:
                    merged.append(left + right)
                    i += 2
                else:
                    merged.append(word[i])
                    i += 1
            word = merged
        return word

    def _encode_piece(self, piece: str) -> Tuple[Tuple[int, ...], Tuple[int, ...]]:
        cached = self._cache.get(piece)
        if cached is None:
            tokens = self._merge_piece(self.alphabet.encode(piece.encode("utf-8")))
            lookup = self.vocab.token_to_id
            cached = tuple(lookup[t] for t in tokens)
            if len(self._cache) >= CACHE_LIMIT:
                self._cache.clear()
            self._cache[piece] = cached
        return cached

    def encode(self, text: Union[str, bytes]) -> TokenSequence:
        text = _to_text(text)
        ids: List[int] = []
        offsets: List[Tuple[int, int]] = []
        position = 0
        id_to_token = self.vocab.id_to_token
        for piece in pre_split(text):
            for token_id in self._encode_piece(piece):
                width = len(id_to_token[token_id])
                ids.append(token_id)
                offsets.append((position, position + width))
                position += width
        return TokenSequence.from_lists(ids, offsets)

    def encode_ids(self, text: Union[str, bytes], add_special_tokens: bool = False) -> List[int]:
        ids = list(self.encode(text).ids)
        if add_special_tokens:
            ids = [self.bos_id] + ids + [self.eos_id]
        return ids

    def encode_batch(self, texts: Iterable[Union[str, bytes]]) -> List[TokenSequence]:
        return [self.encode(t) for t in texts]

    # ==================== decode ====================

    def decode_bytes(self, ids: Sequence[int]) -> bytes:
        id_to_token = self.vocab.id_to_token
        specials = self.vocab.special_ids
        parts: List[str] = []
        for token_id in ids:
            token_id = int(token_id)
            if not 0 <= token_id < len(id_to_token):
                raise AppException(
                    ErrorCode.TOKEN_ID_UNKNOWN,
                    message_en=f"Unknown token id {token_id}",
                    detail={"id": token_id, "vocab_size": len(id_to_token)},
                )
            if token_id in specials:
                continue
            parts.append(id_to_token[token_id])
        return self.alphabet.decode("".join(parts))

    def decode(self, ids: Union[Sequence[int], TokenSequence]) -> str:
        """Decode ids to text; id runs that split a UTF-8 character decode with U+FFFD."""
        if isinstance(ids, TokenSequence):
            ids = ids.ids
        return self.decode_bytes(ids).decode("utf-8", errors="replace")


def encode(text: Union[str, bytes], merges: MergeTable, vocab: Vocabulary) -> TokenSequence:
    return ByteLevelBPETokenizer(merges, vocab).encode(text)


def decode(ids: Union[Sequence[int], TokenSequence], vocab: Vocabulary) -> str:
    return ByteLevelBPETokenizer(MergeTable(()), vocab).decode(ids)


def inspect(tokenizer: ByteLevelBPETokenizer, texts: Iterable[str]) -> Dict[str, Any]:
    """
    壓縮率報告

    Returns:
        dict: 特殊 token、文件數、token 數、位元組數、詞數，以及 tokens_per_byte 與 fertility（每個空白分隔詞的 token 數）
    """
    documents = tokens = total_bytes = words = 0
    for text in texts:
        documents += 1
        tokens += len(tokenizer.encode(text))
        total_bytes += len(text.encode("utf-8"))
        words += len(text.split())
    return {
        "vocab_size": tokenizer.vocab_size,
        "merges": len(tokenizer.merges),
        "special_tokens": tokenizer.vocab.special_tokens,
        "documents": documents,
        "tokens": tokens,
        "bytes": total_bytes,
        "words": words,
        "tokens_per_byte": tokens / total_bytes if total_bytes else 0.0,
        "fertility": tokens / words if words else 0.0,
    }
