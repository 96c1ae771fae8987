"""
CoNLL 格式 NER 資料

每行一個 token，欄位以空白或 tab 分隔，第一欄是 token、最後一欄是 BIO 標籤，
句子之間以空行分隔；-DOCSTART- 行略過。整個檔案的欄位數必須一致。

BIO 違規（I-X 接在 O 或其他類型之後）預設只回報，repair=True 時把 I-X 提升為 B-X，
strict=True 時直接失敗。
"""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Tuple, Union

from ..core.errors import AppException, ErrorCode, raise_parse_error
from ..core.processing import ordered_map
from ..metrics.spans import OUTSIDE, split_tag

logger = logging.getLogger(__name__)

DOCSTART = "-DOCSTART-"

PathLike = Union[str, Path]


@dataclass(frozen=True)
class TaggedSentence:
    tokens: Tuple[str, ...]
    tags: Tuple[str, ...]
    split: Optional[str] = None

    def __post_init__(self):
        if not self.tokens:
            raise ValueError("sentence must contain at least one token")
        if len(self.tokens) != len(self.tags):
            raise ValueError(f"{len(self.tokens)} tokens but {len(self.tags)} tags")

    def __len__(self) -> int:
        return len(self.tokens)

    @property
    def key(self) -> str:
        return " ".join(self.tokens)

    @property
    def text(self) -> str:
        return " ".join(self.tokens)

    def to_record(self):
        return {"tokens": list(self.tokens), "tags": list(self.tags)}


@dataclass(frozen=True)
class BioViolation:
    sentence_index: int
    position: int
    tag: str
    previous: str


def validate_bio(tags: Sequence[str]) -> List[int]:
    """Positions of I-X tags that do not continue an X run."""
    bad = []
    previous_prefix, previous_type = OUTSIDE, ""
    for position, tag in enumerate(tags):
        prefix, entity_type = split_tag(tag)
        if prefix == "I" and (previous_prefix == OUTSIDE or previous_type != entity_type):
            bad.append(position)
        previous_prefix, previous_type = prefix, entity_type
    return bad


def repair_bio(tags: Sequence[str]) -> List[str]:
    repaired = list(tags)
    for position in validate_bio(tags):
        repaired[position] = "B-" + repaired[position][2:]
    return repaired


def find_violations(sentences: Sequence[TaggedSentence]) -> List[BioViolation]:
    found = []
    for index, sentence in enumerate(sentences):
        for position in validate_bio(sentence.tags):
            previous = sentence.tags[position - 1] if position else OUTSIDE
            found.append(BioViolation(index, position, sentence.tags[position], previous))
    return found


def parse_conll(lines: Iterable[str], path: PathLike = "<memory>") -> List[TaggedSentence]:
    sentences: List[TaggedSentence] = []
    tokens: List[str] = []
    tags: List[str] = []
    columns = None

    def flush():
        if tokens:
            sentences.append(TaggedSentence(tuple(tokens), tuple(tags)))
            tokens.clear()
            tags.clear()

    for line_no, raw in enumerate(lines, start=1):
        line = raw.rstrip("\r\n")
        if not line.strip():
            flush()
            continue
        fields = line.split()
        if fields[0] == DOCSTART:
            flush()
            continue
        if columns is None:
            columns = len(fields)
            if columns < 2:
                raise_parse_error(path, line_no, "expected token and tag columns", ErrorCode.CONLL_COLUMNS_MISMATCH)
        if len(fields) != columns:
            raise_parse_error(
                path,
                line_no,
                f"expected {columns} columns, got {len(fields)}",
                ErrorCode.CONLL_COLUMNS_MISMATCH,
            )
        try:
            split_tag(fields[-1])
        except AppException:
            raise_parse_error(path, line_no, f"malformed BIO tag {fields[-1]!r}", ErrorCode.BIO_INVALID)
        tokens.append(fields[0])
        tags.append(fields[-1])
    flush()
    return sentences


def load_conll(path: PathLike, *, repair: bool = False, strict: bool = False) -> List[TaggedSentence]:
    """
    讀取 CoNLL 檔並檢查 BIO 規則

    Args:
        path: CoNLL 檔案
        repair: 把違規的 I-X 提升為 B-X
        strict: 有任何違規即失敗（BIO_INVALID）

    Returns:
        List[TaggedSentence]: 依檔案順序排列的句子
    """
    path = Path(path)
    try:
        with open(path, "r", encoding="utf-8") as handle:
            sentences = parse_conll(handle, path)
    except OSError as e:
        raise AppException(ErrorCode.NOT_FOUND, message_en=f"cannot open {path}: {e}", detail={"path": str(path)}) from e
    except UnicodeDecodeError as e:
        raise AppException(ErrorCode.VALIDATION_ERROR, message_en=f"{path} is not UTF-8: {e}", detail={"path": str(path)}) from e

    violations = find_violations(sentences)
    if violations:
        if strict and not repair:
            raise AppException(
                ErrorCode.BIO_INVALID,
                message_en=f"{path}: {len(violations)} BIO violations",
                detail={"path": str(path)},
                errors=[
                    {"sentence_index": v.sentence_index, "position": v.position, "tag": v.tag, "previous": v.previous}
                    for v in violations
                ],
            )
        for v in violations:
            logger.warning(
                f"BIO violation: path={path} sentence={v.sentence_index} position={v.position} "
                f"tag={v.tag} previous={v.previous}"
            )
        if repair:
            sentences = [
                TaggedSentence(s.tokens, tuple(repair_bio(s.tags)), s.split) if validate_bio(s.tags) else s
                for s in sentences
            ]
            logger.info(f"Repaired {len(violations)} BIO violations in {path}")
    logger.info(f"Loaded CoNLL file: path={path} sentences={len(sentences)}")
    return sentences


def _load_task(task: Tuple[str, bool, bool]) -> List[TaggedSentence]:
    path, repair, strict = task
    return load_conll(path, repair=repair, strict=strict)


def load_conll_files(
    paths: Sequence[PathLike],
    *,
    repair: bool = False,
    strict: bool = False,
    workers: int = 1,
) -> List[List[TaggedSentence]]:
    """Load several files in parallel; results follow ``paths`` order."""
    return ordered_map(_load_task, [(str(p), repair, strict) for p in paths], workers)


def save_conll(sentences: Sequence[TaggedSentence], path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    blocks = []
    for index, sentence in enumerate(sentences):
        for token in sentence.tokens:
            if not token or any(c.isspace() for c in token) or token == DOCSTART:
                raise AppException(
                    ErrorCode.VALIDATION_ERROR,
                    message_en=f"sentence {index}: token {token!r} cannot be written as a CoNLL column",
                    detail={"sentence_index": index},
                )
        blocks.append("\n".join(f"{token}\t{tag}" for token, tag in zip(sentence.tokens, sentence.tags)))
    path.write_text("\n\n".join(blocks) + ("\n" if blocks else ""), encoding="utf-8")
    logger.debug(f"Saved CoNLL file: path={path} sentences={len(sentences)}")
    return path
