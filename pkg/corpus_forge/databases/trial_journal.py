"""Append-only JSONL journal of tuning trials."""

import json
import logging
import os
import threading
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

from ..core.config import Config
from ..core.errors import AppException, ErrorCode, raise_parse_error

logger = logging.getLogger(__name__)

EntryKey = Tuple[str, str]


class TrialJournal:
    """
    One instance per journal file.

    Entries are keyed by (config_hash, role); appending an existing key is a
    no-op, which makes re-running a grid idempotent. Every append is flushed
    and fsynced before returning.
    """

    _instances: Dict[str, "TrialJournal"] = {}

    def __new__(cls, path: Union[str, Path]):
        key = str(Path(path).resolve())
        if key not in cls._instances:
            instance = super().__new__(cls)
            instance._initialized = False
            cls._instances[key] = instance
        return cls._instances[key]

    def __init__(self, path: Union[str, Path]):
        if self._initialized:
            return
        self.path = Path(path).resolve()
        self._lock = threading.Lock()
        self._entries: Dict[EntryKey, Dict[str, Any]] = {}
        self._order: List[EntryKey] = []
        self._stamp: Optional[Tuple[int, int]] = None
        self._initialized = True

    def _file_stamp(self) -> Optional[Tuple[int, int]]:
        try:
            stat = self.path.stat()
        except FileNotFoundError:
            return None
        return stat.st_size, stat.st_mtime_ns

    def refresh(self) -> None:
        """Re-read the file if it changed since the last read."""
        if self._file_stamp() != self._stamp:
            self.reload()

    def reload(self) -> None:
        with self._lock:
            self._entries.clear()
            self._order.clear()
            if not self.path.exists():
                self._stamp = None
                return
            data = self.path.read_bytes()
            lines = data.split(b"\n")
            tail = lines.pop()
            if tail:
                # Unterminated last line from an interrupted append.
                logger.warning(f"Discarding partial journal line: path={self.path} bytes={len(tail)}")
                with open(self.path, "r+b") as handle:
                    handle.truncate(len(data) - len(tail))
            for line_no, line in enumerate(lines, start=1):
                if not line.strip():
                    continue
                try:
                    entry = json.loads(line)
                    key = (entry["config_hash"], entry["role"])
                except (ValueError, KeyError, TypeError) as e:
                    raise_parse_error(self.path, line_no, f"invalid journal entry: {e}", ErrorCode.JOURNAL_CORRUPT)
                if key in self._entries:
                    logger.warning(f"Duplicate journal key ignored: path={self.path} line={line_no} key={key}")
                    continue
                self._entries[key] = entry
                self._order.append(key)
            self._stamp = self._file_stamp()
        logger.debug(f"Journal loaded: path={self.path} entries={len(self._order)}")

    def has(self, config_hash: str, role: str) -> bool:
        return (config_hash, role) in self._entries

    def get(self, config_hash: str, role: str) -> Optional[Dict[str, Any]]:
        return self._entries.get((config_hash, role))

    def entries(self, role: Optional[str] = None) -> List[Dict[str, Any]]:
        return [self._entries[k] for k in self._order if role is None or k[1] == role]

    def __len__(self) -> int:
        return len(self._order)

    def append(self, entry: Dict[str, Any]) -> bool:
        """
        寫入一筆試驗紀錄

        Returns:
            bool: 新寫入為 True；相同 (config_hash, role) 已存在則為 False
        """
        try:
            key = (entry["config_hash"], entry["role"])
        except KeyError as e:
            raise AppException(ErrorCode.VALIDATION_ERROR, message_en=f"journal entry lacks {e}") from e
        with self._lock:
            if key in self._entries:
                return False
            line = json.dumps(entry, ensure_ascii=False, sort_keys=True, separators=(",", ":")) + "\n"
            self.path.parent.mkdir(parents=True, exist_ok=True)
            with open(self.path, "ab") as handle:
                handle.write(line.encode("utf-8"))
                handle.flush()
                os.fsync(handle.fileno())
            self._entries[key] = entry
            self._order.append(key)
            self._stamp = self._file_stamp()
        return True


def get_trial_journal(path: Optional[Union[str, Path]] = None) -> TrialJournal:
    """
    獲取試驗日誌實例（每個檔案一個單例）

    Returns:
        TrialJournal: 已與檔案內容同步的日誌
    """
    journal = TrialJournal(path or Config.JOURNAL_PATH)
    journal.refresh()
    return journal
