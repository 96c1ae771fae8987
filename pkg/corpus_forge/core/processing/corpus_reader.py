"""
語料讀取器模組

這個模組負責以串流方式讀取原始語料檔案，負責：
1. 自動格式檢測（JSONL 或以空行分隔的純文字）
2. 逐筆產出記錄，不把整個檔案載入記憶體
3. 將無法使用的記錄標記拒收原因（invalid_utf8、malformed_json、missing_text）

記錄索引只計算實際產出的記錄（含被拒收者），空行不佔索引。
"""

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Iterator, Optional

logger = logging.getLogger(__name__)

JSONL_SUFFIXES = {".jsonl", ".ndjson", ".json"}

REJECT_INVALID_UTF8 = "invalid_utf8"
REJECT_MALFORMED_JSON = "malformed_json"
REJECT_MISSING_TEXT = "missing_text"


@dataclass(frozen=True)
class RawRecord:
    """One record read from an input file, before it becomes a Document."""

    index: int
    line: int
    text: Optional[bytes] = None
    record_id: Any = None
    source: Optional[str] = None
    reject: Optional[str] = None

    @property
    def rejected(self) -> bool:
        return self.reject is not None


def detect_format(path: Path, fmt: Optional[str] = None) -> str:
    """
    決定檔案格式

    Args:
        path: 輸入檔案
        fmt: 明確指定的格式（"jsonl" 或 "text"），為 None 時依副檔名判斷

    Returns:
        str: "jsonl" 或 "text"
    """
    if fmt:
        return fmt
    return "jsonl" if path.suffix.lower() in JSONL_SUFFIXES else "text"


def iter_jsonl_records(path: Path) -> Iterator[RawRecord]:
    """Stream newline-delimited JSON records with a "text" field."""
    index = 0
    with open(path, "rb") as handle:
        for line_no, raw in enumerate(handle, start=1):
            if not raw.strip():
                continue
            try:
                decoded = raw.decode("utf-8")
            except UnicodeDecodeError:
                yield RawRecord(index=index, line=line_no, reject=REJECT_INVALID_UTF8)
                index += 1
                continue
            try:
                obj = json.loads(decoded)
            except ValueError:
                yield RawRecord(index=index, line=line_no, reject=REJECT_MALFORMED_JSON)
                index += 1
                continue
            if not isinstance(obj, dict) or not isinstance(obj.get("text"), str):
                yield RawRecord(index=index, line=line_no, reject=REJECT_MISSING_TEXT)
                index += 1
                continue
            try:
                # JSON escapes can smuggle lone surrogates past the byte-level check
                text = obj["text"].encode("utf-8")
            except UnicodeEncodeError:
                yield RawRecord(index=index, line=line_no, reject=REJECT_INVALID_UTF8)
                index += 1
                continue
            yield RawRecord(
                index=index,
                line=line_no,
                text=text,
                record_id=obj.get("id"),
                source=obj.get("source") if isinstance(obj.get("source"), str) else None,
            )
            index += 1


def _finish_block(lines: list) -> bytes:
    block = b"".join(lines)
    if block.endswith(b"\r\n"):
        return block[:-2]
    if block.endswith(b"\n"):
        return block[:-1]
    return block


def iter_plain_text_records(path: Path) -> Iterator[RawRecord]:
    """Stream plain-text documents separated by one or more blank lines."""
    index = 0
    buffer: list = []
    start_line = 0
    with open(path, "rb") as handle:
        for line_no, raw in enumerate(handle, start=1):
            if raw.strip():
                if not buffer:
                    start_line = line_no
                buffer.append(raw)
                continue
            if buffer:
                yield _plain_record(index, start_line, _finish_block(buffer))
                index += 1
                buffer = []
    if buffer:
        yield _plain_record(index, start_line, _finish_block(buffer))


def _plain_record(index: int, line: int, text: bytes) -> RawRecord:
    try:
        text.decode("utf-8")
    except UnicodeDecodeError:
        return RawRecord(index=index, line=line, reject=REJECT_INVALID_UTF8)
    return RawRecord(index=index, line=line, text=text)


def iter_records(path: Path, fmt: Optional[str] = None) -> Iterator[RawRecord]:
    """依格式分派到對應的串流讀取器"""
    detected = detect_format(path, fmt)
    logger.debug(f"Reading {path} as {detected}")
    if detected == "jsonl":
        return iter_jsonl_records(path)
    return iter_plain_text_records(path)


def canonical_json_line(obj: Dict[str, Any]) -> bytes:
    """Serialize one JSONL line: compact separators, UTF-8 kept verbatim, trailing newline."""
    return (json.dumps(obj, ensure_ascii=False, separators=(",", ":")) + "\n").encode("utf-8")
