"""
語料文件與清單模型

這個模組定義語料管線的核心資料結構：
1. Document：單一語料單位（穩定 id、來源標記、UTF-8 位元組內容）
2. ShardInfo / CorpusManifest：分片清單與位元組帳目
3. 文件 id 的產生規則（與內容無關，只取決於來源檔名與記錄序號）
"""

import hashlib
import json
import logging
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from pydantic import BaseModel, Field, PrivateAttr, field_validator, model_validator

from ..core.errors import AppException, ErrorCode
from ..core.processing import canonical_json_line

logger = logging.getLogger(__name__)

MANIFEST_FILENAME = "manifest.json"
PASS_THROUGH_NOTE = (
    "language identification and quality filtering were not applied here; "
    "inputs are consumed as already filtered"
)
MAX_DOCUMENT_ID = 2 ** 64


class Source(str, Enum):
    WEB_CORPUS = "web_corpus"
    WIKIPEDIA = "wikipedia"
    OTHER = "other"

    @classmethod
    def parse(cls, value: Optional[str], default: "Source") -> "Source":
        if value is None:
            return default
        try:
            return cls(value)
        except ValueError:
            return default


def document_id(origin: str, index: int, given: Any = None) -> int:
    """
    產生 64 位元文件 id

    有給定 id 時：非負且小於 2**64 的整數直接使用，其他值取雜湊；
    否則由 (來源檔名, 記錄序號) 雜湊而得，與文件內容無關。
    """
    if isinstance(given, int) and not isinstance(given, bool) and 0 <= given < MAX_DOCUMENT_ID:
        return given
    if given is not None:
        key = f"id\x00{given}".encode("utf-8", "surrogatepass")
    else:
        key = f"{origin}\x00{index}".encode("utf-8", "surrogatepass")
    return int.from_bytes(hashlib.blake2b(key, digest_size=8).digest(), "big")


@dataclass(frozen=True)
class Document:
    """One corpus unit. ``text`` is always valid UTF-8."""

    id: int
    source: Source
    text: bytes
    byte_len: int = field(init=False)

    def __post_init__(self):
        try:
            self.text.decode("utf-8")
        except UnicodeDecodeError as e:
            raise AppException(ErrorCode.INVALID_UTF8, detail={"document_id": self.id, "error": str(e)}) from e
        object.__setattr__(self, "byte_len", len(self.text))

    def to_json_line(self) -> bytes:
        return canonical_json_line({"id": self.id, "source": self.source.value, "text": self.text.decode("utf-8")})

    @classmethod
    def from_json_line(cls, line: Union[bytes, str]) -> "Document":
        obj = json.loads(line)
        return cls(id=int(obj["id"]), source=Source(obj["source"]), text=obj["text"].encode("utf-8"))


class ShardInfo(BaseModel):
    """One shard entry; ``path`` is relative to the manifest directory."""

    path: str
    document_count: int = Field(ge=0)
    byte_count: int = Field(ge=0)


class CorpusManifest(BaseModel):
    """
    語料清單

    記錄分片、位元組總量、去重指紋數、洗牌種子與拒收統計。
    分片路徑以清單所在目錄為基準保存，載入後以 resolve_shard 取得實際路徑。
    """

    shards: List[ShardInfo] = Field(default_factory=list)
    total_bytes: int = 0
    document_count: int = 0
    dedup_fingerprint_count: int = 0
    shuffle_seed: Optional[int] = None
    sample_target_bytes: Optional[int] = None
    undersized: bool = False
    max_document_bytes: int = 0
    rejects: Dict[str, int] = Field(default_factory=dict)
    source_bytes: Dict[str, int] = Field(default_factory=dict)
    source_documents: Dict[str, int] = Field(default_factory=dict)
    notes: List[str] = Field(default_factory=list)

    _root: Path = PrivateAttr(default_factory=lambda: Path("."))

    @field_validator("shuffle_seed")
    @classmethod
    def _seed_is_64_bit(cls, value: Optional[int]) -> Optional[int]:
        if value is not None and not 0 <= value < MAX_DOCUMENT_ID:
            raise ValueError("shuffle_seed must be an unsigned 64-bit integer")
        return value

    @model_validator(mode="after")
    def _totals_match_shards(self) -> "CorpusManifest":
        if self.total_bytes != sum(s.byte_count for s in self.shards):
            raise ValueError("total_bytes must equal the sum of shard byte counts")
        if self.document_count != sum(s.document_count for s in self.shards):
            raise ValueError("document_count must equal the sum of shard document counts")
        return self

    @property
    def root(self) -> Path:
        return self._root

    def bind(self, root: Union[str, Path]) -> "CorpusManifest":
        self._root = Path(root)
        return self

    def resolve_shard(self, shard: ShardInfo) -> Path:
        return self._root / shard.path

    def save(self, directory: Union[str, Path]) -> Path:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        path = directory / MANIFEST_FILENAME
        path.write_text(json.dumps(self.model_dump(), ensure_ascii=False, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        self.bind(directory)
        logger.info(f"Manifest written: path={path} documents={self.document_count} bytes={self.total_bytes}")
        return path

    @classmethod
    def load(cls, path: Union[str, Path]) -> "CorpusManifest":
        """Load a manifest file, or ``manifest.json`` inside a directory."""
        path = Path(path)
        if path.is_dir():
            path = path / MANIFEST_FILENAME
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except OSError as e:
            raise AppException(ErrorCode.CORPUS_PATH_UNREADABLE, detail={"path": str(path), "error": str(e)}) from e
        except ValueError as e:
            raise AppException(ErrorCode.MANIFEST_INVALID, detail={"path": str(path), "error": str(e)}) from e
        try:
            manifest = cls.model_validate(data)
        except ValueError as e:
            raise AppException(ErrorCode.MANIFEST_INVALID, detail={"path": str(path), "error": str(e)}) from e
        return manifest.bind(path.parent)
