"""
語料管線

這個模組負責大型語料的串流處理，包括：
1. ingest：讀取 JSONL 或純文字檔，寫成 JSONL 分片並建立清單
2. dedup_exact：以去除尾端空白後的位元組內容做精確去重
3. shuffle：以種子決定的文件級置換重新寫出語料
4. sample_bytes：依洗牌順序取樣直到累積位元組達到目標
5. merge_manifests：把多個來源的清單接成一份

所有輸出只取決於輸入與種子，與 worker 數量無關：平行階段一律以
ordered_map 依分片順序合併結果。
"""

import hashlib
import json
import logging
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np
from tqdm import tqdm

from ..core.config import Config
from ..core.errors import AppException, ErrorCode, raise_validation_error
from ..core.processing import iter_records, ordered_map
from .documents import (
    PASS_THROUGH_NOTE,
    CorpusManifest,
    Document,
    ShardInfo,
    Source,
    document_id,
)

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]
SOURCE_CODES = [s.value for s in Source]


# ==================== Shard writing ====================

@dataclass
class PartResult:
    """Shards and accounting produced by one worker task."""

    shards: List[ShardInfo] = field(default_factory=list)
    rejects: Dict[str, int] = field(default_factory=dict)
    source_bytes: Dict[str, int] = field(default_factory=dict)
    source_documents: Dict[str, int] = field(default_factory=dict)
    max_document_bytes: int = 0


class ShardWriter:
    """
    寫出 JSONL 分片

    分片在第一筆寫入時才建立，因此不會產生空分片；單一分片的文字位元組
    達到 shard_bytes 後換下一個分片。寫入中使用 .tmp 檔名，close 時才換成正式名稱。
    """

    def __init__(self, directory: Path, prefix: str, shard_bytes: Optional[int] = None):
        self.directory = Path(directory)
        self.prefix = prefix
        self.shard_bytes = shard_bytes
        self.result = PartResult()
        self._handle = None
        self._name: Optional[str] = None
        self._documents = 0
        self._bytes = 0

    def _open(self) -> None:
        self._name = f"{self.prefix}-{len(self.result.shards):05d}.jsonl"
        self._handle = open(self.directory / f"{self._name}.tmp", "wb")
        self._documents = 0
        self._bytes = 0

    def _finish(self) -> None:
        if self._handle is None:
            return
        self._handle.close()
        os.replace(self.directory / f"{self._name}.tmp", self.directory / self._name)
        self.result.shards.append(ShardInfo(path=self._name, document_count=self._documents, byte_count=self._bytes))
        self._handle = None

    def write(self, line: bytes, byte_len: int, source: str) -> None:
        if self._handle is None:
            self._open()
        self._handle.write(line)
        self._documents += 1
        self._bytes += byte_len
        result = self.result
        result.source_bytes[source] = result.source_bytes.get(source, 0) + byte_len
        result.source_documents[source] = result.source_documents.get(source, 0) + 1
        result.max_document_bytes = max(result.max_document_bytes, byte_len)
        if self.shard_bytes and self._bytes >= self.shard_bytes:
            self._finish()

    def write_document(self, document: Document) -> None:
        self.write(document.to_json_line(), document.byte_len, document.source.value)

    def close(self) -> PartResult:
        self._finish()
        return self.result


def _add_counts(target: Dict[str, int], extra: Dict[str, int]) -> None:
    for key, value in extra.items():
        target[key] = target.get(key, 0) + value


def _assemble(parts: Sequence[PartResult], base: Optional[CorpusManifest] = None, **overrides) -> CorpusManifest:
    shards: List[ShardInfo] = []
    source_bytes: Dict[str, int] = {}
    source_documents: Dict[str, int] = {}
    rejects: Dict[str, int] = dict(base.rejects) if base else {}
    max_bytes = 0
    for part in parts:
        shards.extend(part.shards)
        _add_counts(source_bytes, part.source_bytes)
        _add_counts(source_documents, part.source_documents)
        _add_counts(rejects, part.rejects)
        max_bytes = max(max_bytes, part.max_document_bytes)
    fields = {
        "shards": shards,
        "total_bytes": sum(s.byte_count for s in shards),
        "document_count": sum(s.document_count for s in shards),
        "max_document_bytes": max_bytes,
        "rejects": rejects,
        "source_bytes": source_bytes,
        "source_documents": source_documents,
        "notes": list(base.notes) if base else [],
        "dedup_fingerprint_count": base.dedup_fingerprint_count if base else 0,
        "shuffle_seed": base.shuffle_seed if base else None,
    }
    fields.update(overrides)
    return CorpusManifest(**fields)


def _prepare_output(output_dir: PathLike) -> Path:
    path = Path(output_dir)
    path.mkdir(parents=True, exist_ok=True)
    return path


# ==================== Reading ====================

def iter_shard_lines(manifest: CorpusManifest) -> Iterator[bytes]:
    """Raw JSONL lines of every shard, in manifest order."""
    for shard in manifest.shards:
        path = manifest.resolve_shard(shard)
        try:
            handle = open(path, "rb")
        except OSError as e:
            raise AppException(ErrorCode.CORPUS_PATH_UNREADABLE, detail={"path": str(path), "error": str(e)}) from e
        with handle:
            for line in handle:
                if line.strip():
                    yield line


def iter_documents(manifest: CorpusManifest) -> Iterator[Document]:
    """串流讀取清單中的全部文件（分片順序、分片內記錄順序）"""
    for line in iter_shard_lines(manifest):
        yield Document.from_json_line(line)


def iter_texts(manifest: CorpusManifest) -> Iterator[str]:
    for line in iter_shard_lines(manifest):
        yield json.loads(line)["text"]


# ==================== ingest ====================

def _ingest_file(task: Tuple[int, str, str, str, Optional[int], Optional[str]]) -> PartResult:
    file_index, path, source, output_dir, shard_bytes, fmt = task
    default_source = Source(source)
    origin = f"{default_source.value}\x00{Path(path).name}"
    writer = ShardWriter(Path(output_dir), f"part-{file_index:05d}", shard_bytes)
    rejects: Dict[str, int] = {}
    for record in iter_records(Path(path), fmt):
        if record.rejected:
            rejects[record.reject] = rejects.get(record.reject, 0) + 1
            logger.warning(f"Rejected record: path={path} line={record.line} reason={record.reject}")
            continue
        document = Document(
            id=document_id(origin, record.index, record.record_id),
            source=Source.parse(record.source, default_source),
            text=record.text,
        )
        writer.write_document(document)
    result = writer.close()
    result.rejects = rejects
    return result


def ingest(
    paths: Sequence[PathLike],
    source: Union[Source, str],
    output_dir: PathLike,
    *,
    shard_bytes: Optional[int] = None,
    workers: int = 1,
    fmt: Optional[str] = None,
) -> CorpusManifest:
    """
    匯入原始語料檔案

    Args:
        paths: 輸入檔案（JSONL 或以空行分隔的純文字）
        source: 預設來源標記，JSONL 記錄自帶合法 "source" 時以記錄為準
        output_dir: 分片與清單的輸出目錄
        shard_bytes: 單一分片的文字位元組上限
        workers: 平行處理的檔案數
        fmt: 強制指定格式（"jsonl" 或 "text"）

    Returns:
        CorpusManifest: 已寫入 output_dir 的清單
    """
    source = Source(source)
    resolved = [Path(p) for p in paths]
    for path in resolved:
        if not path.is_file() or not os.access(path, os.R_OK):
            raise AppException(
                ErrorCode.CORPUS_PATH_UNREADABLE,
                message_en=f"Corpus path unreadable: {path}",
                detail={"path": str(path)},
            )
    out = _prepare_output(output_dir)
    shard_bytes = shard_bytes or Config.SHARD_BYTES
    tasks = [(i, str(p), source.value, str(out), shard_bytes, fmt) for i, p in enumerate(resolved)]
    parts = ordered_map(_ingest_file, tasks, workers)
    manifest = _assemble(parts, notes=[PASS_THROUGH_NOTE])
    logger.info(
        f"Ingested: files={len(resolved)} documents={manifest.document_count} "
        f"bytes={manifest.total_bytes} rejects={sum(manifest.rejects.values())}"
    )
    manifest.save(out)
    return manifest


# ==================== dedup_exact ====================

def fingerprint(text: bytes) -> bytes:
    """Dedup key: 128-bit digest of the text with trailing Unicode whitespace trimmed."""
    trimmed = text.decode("utf-8").rstrip().encode("utf-8")
    return hashlib.blake2b(trimmed, digest_size=16).digest()


def _fingerprint_shard(path: str) -> List[bytes]:
    with open(path, "rb") as handle:
        return [fingerprint(json.loads(line)["text"].encode("utf-8")) for line in handle if line.strip()]


def _rewrite_shard(task: Tuple[int, str, str, bytes]) -> PartResult:
    shard_index, path, output_dir, keep = task
    writer = ShardWriter(Path(output_dir), f"dedup-{shard_index:05d}")
    with open(path, "rb") as handle:
        lines = (line for line in handle if line.strip())
        for line, kept in zip(lines, keep):
            if kept:
                obj = json.loads(line)
                writer.write(line, len(obj["text"].encode("utf-8")), obj["source"])
    return writer.close()


def dedup_exact(manifest: CorpusManifest, output_dir: PathLike, *, workers: int = 1) -> CorpusManifest:
    """
    精確去重：每個正規化文字只保留第一次出現（依分片順序）

    正規化為去除尾端 ASCII 空白後的位元組完全一致。
    """
    out = _prepare_output(output_dir)
    shard_paths = [str(manifest.resolve_shard(s)) for s in manifest.shards]
    fingerprints = ordered_map(_fingerprint_shard, shard_paths, workers)

    seen = set()
    masks: List[bytes] = []
    for shard_prints in fingerprints:
        keep = bytearray(len(shard_prints))
        for position, digest in enumerate(shard_prints):
            if digest not in seen:
                seen.add(digest)
                keep[position] = 1
        masks.append(bytes(keep))

    tasks = [(i, path, str(out), keep) for i, (path, keep) in enumerate(zip(shard_paths, masks))]
    parts = ordered_map(_rewrite_shard, tasks, workers)
    result = _assemble(parts, base=manifest, dedup_fingerprint_count=len(seen), shuffle_seed=None)
    logger.info(
        f"Deduplicated: input={manifest.document_count} kept={result.document_count} "
        f"removed={manifest.document_count - result.document_count}"
    )
    result.save(out)
    return result


# ==================== shuffle / sample_bytes ====================

@dataclass
class DocumentIndex:
    """Location table of every document: shard, byte offset, text bytes, source code."""

    shard: np.ndarray
    offset: np.ndarray
    byte_len: np.ndarray
    source: np.ndarray

    def __len__(self) -> int:
        return int(self.offset.shape[0])


def _index_shard(path: str) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    offsets: List[int] = []
    lengths: List[int] = []
    sources: List[int] = []
    position = 0
    with open(path, "rb") as handle:
        for line in handle:
            if line.strip():
                obj = json.loads(line)
                offsets.append(position)
                lengths.append(len(obj["text"].encode("utf-8")))
                sources.append(SOURCE_CODES.index(obj["source"]))
            position += len(line)
    return (
        np.asarray(offsets, dtype=np.int64),
        np.asarray(lengths, dtype=np.int64),
        np.asarray(sources, dtype=np.int8),
    )


def build_index(manifest: CorpusManifest, workers: int = 1) -> DocumentIndex:
    paths = [str(manifest.resolve_shard(s)) for s in manifest.shards]
    tables = ordered_map(_index_shard, paths, workers)
    if not tables:
        empty = np.zeros(0, dtype=np.int64)
        return DocumentIndex(empty, empty, empty, np.zeros(0, dtype=np.int8))
    return DocumentIndex(
        shard=np.concatenate([np.full(len(t[0]), i, dtype=np.int64) for i, t in enumerate(tables)]),
        offset=np.concatenate([t[0] for t in tables]),
        byte_len=np.concatenate([t[1] for t in tables]),
        source=np.concatenate([t[2] for t in tables]),
    )


def permutation(count: int, seed: int) -> np.ndarray:
    """Seeded uniform permutation of ``range(count)`` (Fisher-Yates inside numpy)."""
    return np.random.default_rng(seed).permutation(count)


def _write_in_order(
    manifest: CorpusManifest,
    index: DocumentIndex,
    order: np.ndarray,
    output_dir: Path,
    prefix: str,
    shard_bytes: Optional[int],
) -> PartResult:
    handles = [open(manifest.resolve_shard(s), "rb") for s in manifest.shards]
    writer = ShardWriter(output_dir, prefix, shard_bytes or Config.SHARD_BYTES)
    try:
        for position in tqdm(order.tolist(), desc=prefix, unit="doc", disable=None):
            handle = handles[int(index.shard[position])]
            handle.seek(int(index.offset[position]))
            writer.write(handle.readline(), int(index.byte_len[position]), SOURCE_CODES[int(index.source[position])])
    finally:
        for handle in handles:
            handle.close()
    return writer.close()


def shuffle(
    manifest: CorpusManifest,
    seed: int,
    output_dir: PathLike,
    *,
    shard_bytes: Optional[int] = None,
    workers: int = 1,
) -> CorpusManifest:
    """
    文件級洗牌

    置換只取決於 (seed, 輸入順序)；文件內容逐位元組原樣寫出。
    """
    out = _prepare_output(output_dir)
    index = build_index(manifest, workers)
    order = permutation(len(index), seed)
    part = _write_in_order(manifest, index, order, out, "shuffle", shard_bytes)
    result = _assemble([part], base=manifest, shuffle_seed=seed)
    logger.info(f"Shuffled: documents={result.document_count} seed={seed}")
    result.save(out)
    return result


def sample_bytes(
    manifest: CorpusManifest,
    target_bytes: int,
    seed: int,
    output_dir: PathLike,
    *,
    shard_bytes: Optional[int] = None,
    workers: int = 1,
) -> CorpusManifest:
    """
    依洗牌順序取樣，直到累積位元組第一次達到或超過 target_bytes

    target_bytes 超過語料總量時回傳整份語料（洗牌順序）並標記 undersized；
    剛好等於總量時取完整份語料但不標記。
    """
    if target_bytes <= 0:
        raise_validation_error(
            "target_bytes",
            "取樣目標必須為正數",
            f"target_bytes must be positive, got {target_bytes}",
            ErrorCode.SAMPLE_TARGET_INVALID,
        )
    out = _prepare_output(output_dir)
    index = build_index(manifest, workers)
    order = permutation(len(index), seed)
    undersized = target_bytes > manifest.total_bytes
    if undersized:
        logger.warning(f"Sample target {target_bytes} > corpus size {manifest.total_bytes}; returning full corpus")
    else:
        cumulative = np.cumsum(index.byte_len[order])
        take = int(np.searchsorted(cumulative, target_bytes, side="left")) + 1
        order = order[:take]
    part = _write_in_order(manifest, index, order, out, "sample", shard_bytes)
    result = _assemble(
        [part],
        base=manifest,
        shuffle_seed=seed,
        sample_target_bytes=target_bytes,
        undersized=undersized,
    )
    logger.info(
        f"Sampled: target={target_bytes} bytes={result.total_bytes} documents={result.document_count} "
        f"undersized={undersized} sources={result.source_documents}"
    )
    result.save(out)
    return result


# ==================== merge ====================

def merge_manifests(manifests: Sequence[CorpusManifest], output_dir: PathLike) -> CorpusManifest:
    """
    把多份清單依給定順序接起來（例如網頁語料 + 維基百科）

    分片不複製，合併後的清單以相對路徑指回原分片。
    """
    out = _prepare_output(output_dir).resolve()
    parts: List[PartResult] = []
    notes: List[str] = []
    for manifest in manifests:
        shards = [
            ShardInfo(
                path=os.path.relpath(manifest.resolve_shard(s).resolve(), out),
                document_count=s.document_count,
                byte_count=s.byte_count,
            )
            for s in manifest.shards
        ]
        parts.append(
            PartResult(
                shards=shards,
                rejects=dict(manifest.rejects),
                source_bytes=dict(manifest.source_bytes),
                source_documents=dict(manifest.source_documents),
                max_document_bytes=manifest.max_document_bytes,
            )
        )
        notes.extend(n for n in manifest.notes if n not in notes)
    result = _assemble(parts, notes=notes)
    logger.info(f"Merged {len(manifests)} manifests: documents={result.document_count} bytes={result.total_bytes}")
    result.save(out)
    return result
