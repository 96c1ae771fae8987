"""
詞表檔案讀寫

三個檔案：
- vocab.json：token → id 的 JSON 對照表
- merges.txt：第一行為版本註解，其後每行一條 "left right"，行序即 rank
- metadata.json：詞表大小、特殊 token、pre-splitter 版本、訓練語料指紋

載入時任何格式錯誤都會指出檔案與行號。
"""

import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

from ..core.config import config_manager
from ..core.errors import ErrorCode, raise_parse_error
from .alphabet import default_alphabet
from .bpe import ByteLevelBPETokenizer
from .trainer import TrainingResult
from .vocab import MergeTable, Pair, Vocabulary

logger = logging.getLogger(__name__)

VOCAB_FILENAME = "vocab.json"
MERGES_FILENAME = "merges.txt"
METADATA_FILENAME = "metadata.json"

PathLike = Union[str, Path]


def save_tokenizer(
    merges: MergeTable,
    vocab: Vocabulary,
    directory: PathLike,
    metadata: Optional[Dict[str, Any]] = None,
) -> Dict[str, Path]:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = {
        "vocab": directory / VOCAB_FILENAME,
        "merges": directory / MERGES_FILENAME,
        "metadata": directory / METADATA_FILENAME,
    }
    paths["vocab"].write_text(
        json.dumps({token: index for index, token in enumerate(vocab.id_to_token)}, ensure_ascii=False) + "\n",
        encoding="utf-8",
    )
    header = config_manager.get_constant("MERGES_VERSION_HEADER")
    lines = [header] + [f"{left} {right}" for left, right in merges.merges]
    paths["merges"].write_text("\n".join(lines) + "\n", encoding="utf-8")
    meta = {
        "vocab_size": vocab.size,
        "merge_count": len(merges),
        "specials": {role: vocab.id_to_token[index] for role, index in vocab.specials.items()},
        "special_ids": dict(vocab.specials),
        "pre_splitter": config_manager.get_constant("PRE_SPLITTER_VERSION"),
    }
    meta.update(metadata or {})
    paths["metadata"].write_text(json.dumps(meta, ensure_ascii=False, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    logger.info(f"Tokenizer saved: dir={directory} vocab_size={vocab.size} merges={len(merges)}")
    return paths


def save_training_result(result: TrainingResult, directory: PathLike) -> Dict[str, Path]:
    return save_tokenizer(
        result.merges,
        result.vocab,
        directory,
        metadata={
            "requested_vocab_size": result.requested_vocab_size,
            "min_pair_frequency": result.min_pair_frequency,
            "truncated": result.truncated,
            "corpus_fingerprint": result.corpus_fingerprint,
            "corpus_bytes": result.corpus_bytes,
            "pre_token_types": result.pre_token_types,
            "pre_token_count": result.pre_token_count,
        },
    )


def _read_text(path: Path) -> str:
    try:
        return path.read_text(encoding="utf-8")
    except OSError as e:
        raise_parse_error(path, 0, f"cannot read file: {e}", ErrorCode.TOKENIZER_FILE_MALFORMED)
    except UnicodeDecodeError as e:
        raise_parse_error(path, 0, f"not UTF-8: {e}", ErrorCode.TOKENIZER_FILE_MALFORMED)


def _load_json(path: Path) -> Any:
    try:
        return json.loads(_read_text(path))
    except json.JSONDecodeError as e:
        raise_parse_error(path, e.lineno, e.msg, ErrorCode.TOKENIZER_FILE_MALFORMED)


def _load_metadata(path: Path) -> Dict[str, Any]:
    if not path.exists():
        return {}
    meta = _load_json(path)
    if not isinstance(meta, dict):
        raise_parse_error(path, 1, "metadata must be a JSON object", ErrorCode.TOKENIZER_FILE_MALFORMED)
    return meta


def _load_vocab(path: Path, meta: Dict[str, Any]) -> Vocabulary:
    mapping = _load_json(path)
    if not isinstance(mapping, dict):
        raise_parse_error(path, 1, "vocabulary must be a JSON object", ErrorCode.TOKENIZER_FILE_MALFORMED)
    tokens: List[Optional[str]] = [None] * len(mapping)
    for token, index in mapping.items():
        if not isinstance(index, int) or not 0 <= index < len(mapping) or tokens[index] is not None:
            raise_parse_error(path, 1, f"token {token!r} has invalid id {index!r}", ErrorCode.TOKENIZER_FILE_MALFORMED)
        tokens[index] = token
    special_ids = meta.get("special_ids")
    if special_ids is None:
        special_ids = {role: mapping.get(token) for role, token in config_manager.get_special_tokens()}
    for role, index in special_ids.items():
        if not isinstance(index, int) or not 0 <= index < len(tokens):
            raise_parse_error(path, 1, f"special token {role} missing", ErrorCode.TOKENIZER_FILE_MALFORMED)
    return Vocabulary(tuple(tokens), dict(special_ids))


def _load_merges(path: Path, vocab: Vocabulary, expected: Optional[int]) -> MergeTable:
    lines = _read_text(path).split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    header = config_manager.get_constant("MERGES_VERSION_HEADER")
    if not lines or not lines[0].startswith("#version"):
        raise_parse_error(path, 1, f"expected version header {header!r}", ErrorCode.TOKENIZER_FILE_MALFORMED)
    known = set(default_alphabet().byte_to_symbol)
    merges: List[Pair] = []
    seen = set()
    for line_no, line in enumerate(lines[1:], start=2):
        parts = line.split(" ")
        if len(parts) != 2 or not parts[0] or not parts[1]:
            raise_parse_error(path, line_no, f"expected 'left right', got {line!r}", ErrorCode.TOKENIZER_FILE_MALFORMED)
        left, right = parts
        if left not in known or right not in known:
            raise_parse_error(path, line_no, "merge uses a token not defined by earlier lines", ErrorCode.TOKENIZER_FILE_MALFORMED)
        if (left, right) in seen:
            raise_parse_error(path, line_no, "duplicate merge", ErrorCode.TOKENIZER_FILE_MALFORMED)
        if left + right not in vocab.token_to_id:
            raise_parse_error(path, line_no, "merged token missing from vocabulary", ErrorCode.TOKENIZER_FILE_MALFORMED)
        seen.add((left, right))
        known.add(left + right)
        merges.append((left, right))
    if expected is not None and len(merges) != expected:
        raise_parse_error(
            path,
            len(lines) + 1,
            f"file ends after {len(merges)} merges, metadata declares {expected}",
            ErrorCode.TOKENIZER_FILE_MALFORMED,
        )
    return MergeTable(tuple(merges))


def load_tables(directory: PathLike) -> Tuple[MergeTable, Vocabulary, Dict[str, Any]]:
    directory = Path(directory)
    meta = _load_metadata(directory / METADATA_FILENAME)
    vocab = _load_vocab(directory / VOCAB_FILENAME, meta)
    if "vocab_size" in meta and meta["vocab_size"] != vocab.size:
        raise_parse_error(
            directory / VOCAB_FILENAME,
            1,
            f"vocabulary has {vocab.size} tokens, metadata declares {meta['vocab_size']}",
            ErrorCode.TOKENIZER_FILE_MALFORMED,
        )
    merges = _load_merges(directory / MERGES_FILENAME, vocab, meta.get("merge_count"))
    return merges, vocab, meta


def load_tokenizer(directory: PathLike) -> ByteLevelBPETokenizer:
    merges, vocab, _ = load_tables(directory)
    logger.debug(f"Tokenizer loaded: dir={directory} vocab_size={vocab.size}")
    return ByteLevelBPETokenizer(merges, vocab)
