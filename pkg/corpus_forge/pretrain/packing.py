"""
序列打包

文件依序接成一條 token 流，文件之間插入 </s>，再切成固定長度的序列；
最後一段不足長度時以 <pad> 補齊。空文件直接略過，不產生多餘的分隔符。

pack_sequences 在記憶體中組出整個陣列，適合小資料；大型語料用 pack_to_file
串流寫成 .npy，再以 load_packed 做 memory-map 讀取。
"""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, List, Sequence, Tuple, Union

import numpy as np

from ..core.errors import ErrorCode, raise_operation_failed, raise_validation_error

logger = logging.getLogger(__name__)

ROW_DTYPE = np.int32
ROWS_PER_WRITE = 4096


@dataclass(frozen=True)
class PackedSequences:
    """``ids`` has shape (rows, sequence_length); ``lengths[i]`` counts the non-pad prefix of row i."""

    ids: np.ndarray
    lengths: np.ndarray
    sequence_length: int

    def __len__(self) -> int:
        return int(self.ids.shape[0])

    @property
    def token_count(self) -> int:
        return int(self.lengths.sum(dtype=np.int64))


def _check_length(sequence_length: int) -> None:
    if sequence_length < 1:
        raise_validation_error(
            "sequence_length",
            "序列長度必須為正數",
            f"sequence_length must be positive, got {sequence_length}",
        )


def iter_packed(
    token_streams: Iterable[Sequence[int]],
    sequence_length: int,
    separator_id: int,
) -> Iterator[List[int]]:
    """Yield unpadded chunks; every chunk except the last has exactly ``sequence_length`` ids."""
    _check_length(sequence_length)
    buffer: List[int] = []
    started = False
    for stream in token_streams:
        if len(stream) == 0:
            continue
        if started:
            buffer.append(separator_id)
        buffer.extend(int(t) for t in stream)
        started = True
        while len(buffer) >= sequence_length:
            yield buffer[:sequence_length]
            buffer = buffer[sequence_length:]
    if buffer:
        yield buffer


def pack_sequences(
    token_streams: Iterable[Sequence[int]],
    sequence_length: int,
    separator_id: int,
    pad_id: int,
) -> PackedSequences:
    """
    打包成固定長度序列

    Args:
        token_streams: 每份文件編碼後的 token id
        sequence_length: 每列長度（預設 512）
        separator_id: 文件間分隔符（</s>）
        pad_id: 末段補齊用的 id

    Returns:
        PackedSequences: 1030 個 token、長度 512 時為 512 / 512 / 6 + padding 三列
    """
    chunks = list(iter_packed(token_streams, sequence_length, separator_id))
    ids = np.full((len(chunks), sequence_length), pad_id, dtype=ROW_DTYPE)
    lengths = np.zeros(len(chunks), dtype=ROW_DTYPE)
    for row, chunk in enumerate(chunks):
        ids[row, : len(chunk)] = chunk
        lengths[row] = len(chunk)
    logger.debug(f"Packed sequences: rows={len(chunks)} tokens={int(lengths.sum())} length={sequence_length}")
    return PackedSequences(ids, lengths, sequence_length)


def unpack(packed: PackedSequences) -> Tuple[int, ...]:
    """The separator-joined stream, padding removed."""
    out: List[int] = []
    for row, length in zip(packed.ids, packed.lengths):
        out.extend(int(t) for t in row[: int(length)])
    return tuple(out)


def npy_path(path: Union[str, Path]) -> Path:
    path = Path(path)
    return path if path.suffix == ".npy" else path.with_name(path.name + ".npy")


def lengths_path(path: Union[str, Path]) -> Path:
    """``rows.npy`` keeps its per-row lengths next to it in ``rows.lengths.npy``."""
    path = npy_path(path)
    return path.with_name(path.stem + ".lengths.npy")


def pack_to_file(
    token_streams: Iterable[Sequence[int]],
    path: Union[str, Path],
    sequence_length: int,
    separator_id: int,
    pad_id: int,
    *,
    rows_per_write: int = ROWS_PER_WRITE,
) -> Tuple[int, int]:
    """
    串流打包並寫成 .npy

    每 rows_per_write 列以 int32 附加到暫存檔，結束後依列數建立 open_memmap
    再分塊複製，記憶體用量只取決於 rows_per_write 與 sequence_length。

    Returns:
        (rows, tokens): 列數與非 padding 的 token 數
    """
    _check_length(sequence_length)
    if rows_per_write < 1:
        raise_validation_error("rows_per_write", "每次寫入列數必須為正數", f"rows_per_write must be positive, got {rows_per_write}")
    path = npy_path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    scratch = path.with_name(path.name + ".part")
    block = np.full((rows_per_write, sequence_length), pad_id, dtype=ROW_DTYPE)
    block_lengths = np.zeros(rows_per_write, dtype=ROW_DTYPE)
    length_parts: List[np.ndarray] = []
    rows = filled = 0

    try:
        with open(scratch, "wb") as handle:
            for chunk in iter_packed(token_streams, sequence_length, separator_id):
                block[filled, : len(chunk)] = chunk
                block_lengths[filled] = len(chunk)
                filled += 1
                if filled == rows_per_write:
                    handle.write(block.tobytes())
                    length_parts.append(block_lengths.copy())
                    rows += filled
                    block.fill(pad_id)
                    filled = 0
            if filled:
                handle.write(block[:filled].tobytes())
                length_parts.append(block_lengths[:filled].copy())
                rows += filled

        if rows == 0:
            np.save(path, np.zeros((0, sequence_length), dtype=ROW_DTYPE))
        else:
            source = np.memmap(scratch, dtype=ROW_DTYPE, mode="r", shape=(rows, sequence_length))
            target = np.lib.format.open_memmap(path, mode="w+", dtype=ROW_DTYPE, shape=(rows, sequence_length))
            for start in range(0, rows, rows_per_write):
                target[start : start + rows_per_write] = source[start : start + rows_per_write]
            target.flush()
            del source, target
    except OSError as e:
        raise_operation_failed("write packed sequences", ErrorCode.CORPUS_PATH_UNREADABLE, e, detail={"path": str(path)})
    finally:
        scratch.unlink(missing_ok=True)

    lengths = np.concatenate(length_parts) if length_parts else np.zeros(0, dtype=ROW_DTYPE)
    np.save(lengths_path(path), lengths)
    tokens = int(lengths.sum(dtype=np.int64))
    logger.info(f"Packed to file: path={path} rows={rows} tokens={tokens} length={sequence_length}")
    return rows, tokens


def load_packed(path: Union[str, Path]) -> PackedSequences:
    """Memory-mapped view of a pack_to_file output; rows are read on access."""
    path = npy_path(path)
    ids = np.load(path, mmap_mode="r")
    lengths_file = lengths_path(path)
    if lengths_file.is_file():
        lengths = np.load(lengths_file)
    else:
        lengths = np.full(ids.shape[0], ids.shape[1] if ids.ndim == 2 else 0, dtype=ROW_DTYPE)
    if ids.ndim != 2 or lengths.shape[0] != ids.shape[0]:
        raise_validation_error("packed", "打包檔案形狀不符", f"{path} holds {ids.shape} rows but {lengths.shape[0]} lengths")
    return PackedSequences(ids, lengths, int(ids.shape[1]))
