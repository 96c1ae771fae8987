"""
情感分類資料載入

這個模組負責：
1. 讀取 TSV / CSV 格式的情感資料（text、label、可選的 split 欄）
2. 透過常量中的別名表把上游標籤對應到 positive / neutral / negative
3. 語料內精確去重（保留第一次出現）與跨切分的資料洩漏稽核

檔案格式：
    text<TAB>label[<TAB>split]
副檔名為 .csv 時改用逗號分隔；第二欄為 "label" 的首行視為表頭略過。
"""

import csv
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

from ..core.config import config_manager
from ..core.errors import AppException, ErrorCode, raise_parse_error

logger = logging.getLogger(__name__)

LABELS: Tuple[str, ...] = ("positive", "neutral", "negative")

PathLike = Union[str, Path]


@dataclass(frozen=True)
class LabeledText:
    text: str
    label: int
    split: Optional[str] = None
    row: int = 0

    def __post_init__(self):
        if not self.text.strip():
            raise ValueError("text must contain at least one token")
        if not 0 <= self.label < len(LABELS):
            raise ValueError(f"label id {self.label} outside {LABELS}")

    @property
    def tokens(self) -> List[str]:
        return self.text.split()

    @property
    def label_name(self) -> str:
        return LABELS[self.label]

    @property
    def key(self) -> str:
        return self.text

    def to_record(self) -> Dict[str, object]:
        return {"text": self.text, "label": self.label_name}


def parse_label(raw: str) -> Optional[int]:
    """Label id for an upstream label string, or None when the alias table has no entry."""
    name = config_manager.get_label_aliases().get(raw.strip().lower())
    return LABELS.index(name) if name is not None else None


def _delimiter(path: Path) -> str:
    return "," if path.suffix.lower() == ".csv" else "\t"


def load_sentiment(path: PathLike, *, audit: bool = True) -> List[LabeledText]:
    """
    讀取情感資料檔

    Args:
        path: TSV 或 CSV 檔
        audit: 檔案帶有 split 欄時，是否順便稽核跨切分重複

    Returns:
        List[LabeledText]: 依檔案順序排列的樣本

    Raises:
        AppException: LABEL_UNKNOWN（附行號）、欄位不足或文字為空
    """
    path = Path(path)
    try:
        handle = open(path, "r", encoding="utf-8", newline="")
    except OSError as e:
        raise AppException(ErrorCode.NOT_FOUND, message_en=f"cannot open {path}: {e}", detail={"path": str(path)}) from e

    samples: List[LabeledText] = []
    with handle:
        delimiter = _delimiter(path)
        quoting = csv.QUOTE_MINIMAL if delimiter == "," else csv.QUOTE_NONE
        reader = csv.reader(handle, delimiter=delimiter, quoting=quoting)
        try:
            for row in reader:
                line = reader.line_num
                if not row or not any(cell.strip() for cell in row):
                    continue
                if len(row) < 2:
                    raise_parse_error(path, line, f"expected text and label columns, got {len(row)}", ErrorCode.VALIDATION_ERROR)
                if not samples and row[1].strip().lower() == "label":
                    continue
                text = row[0].strip()
                if not text:
                    raise_parse_error(path, line, "empty text", ErrorCode.VALIDATION_ERROR)
                label = parse_label(row[1])
                if label is None:
                    raise_parse_error(path, line, f"unknown label {row[1]!r}", ErrorCode.LABEL_UNKNOWN)
                split = row[2].strip().lower() if len(row) > 2 and row[2].strip() else None
                samples.append(LabeledText(text, label, split, line))
        except UnicodeDecodeError as e:
            raise_parse_error(path, reader.line_num + 1, f"not UTF-8: {e}", ErrorCode.VALIDATION_ERROR)

    logger.info(f"Loaded sentiment file: path={path} samples={len(samples)}")
    if audit and any(s.split for s in samples):
        report = audit_leakage(group_by_split(samples))
        if report.count:
            logger.warning(f"Cross-split duplicates in {path}: collisions={report.count}")
    return samples


# ==================== dedup and leakage ====================

@dataclass(frozen=True)
class Collision:
    key: str
    splits: Tuple[str, ...]
    positions: Tuple[Tuple[str, int], ...]


@dataclass
class LeakageReport:
    collisions: List[Collision] = field(default_factory=list)

    @property
    def count(self) -> int:
        return len(self.collisions)

    def to_dict(self) -> Dict[str, object]:
        return {
            "collisions": self.count,
            "items": [
                {"text": c.key, "splits": list(c.splits), "positions": [list(p) for p in c.positions]}
                for c in self.collisions
            ],
        }


def group_by_split(samples: Iterable) -> Dict[str, List]:
    groups: Dict[str, List] = {}
    for sample in samples:
        groups.setdefault(sample.split or "unassigned", []).append(sample)
    return groups


def audit_leakage(splits: Mapping[str, Sequence]) -> LeakageReport:
    """
    Byte-identical samples appearing in more than one split.

    Works on anything with a ``key`` property, so sentiment samples and
    tagged sentences share the audit.
    """
    seen: Dict[str, List[Tuple[str, int]]] = {}
    for name in sorted(splits):
        for index, sample in enumerate(splits[name]):
            seen.setdefault(sample.key, []).append((name, index))
    report = LeakageReport()
    for key, positions in seen.items():
        names = tuple(sorted({name for name, _ in positions}))
        if len(names) > 1:
            report.collisions.append(Collision(key, names, tuple(positions)))
    report.collisions.sort(key=lambda c: c.positions[0])
    return report


def deduplicate_samples(samples: Sequence) -> Tuple[List, int]:
    """First occurrence of every key wins; returns (kept, dropped_count)."""
    kept = []
    seen = set()
    for sample in samples:
        if sample.key in seen:
            continue
        seen.add(sample.key)
        kept.append(sample)
    dropped = len(samples) - len(kept)
    if dropped:
        logger.info(f"Dropped duplicate samples: dropped={dropped} kept={len(kept)}")
    return kept, dropped


def label_counts(samples: Iterable[LabeledText]) -> Dict[str, int]:
    counts = {name: 0 for name in LABELS}
    for sample in samples:
        counts[sample.label_name] += 1
    return counts
