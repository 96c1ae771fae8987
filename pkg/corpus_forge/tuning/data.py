"""
任務資料載入

這個模組負責把三個評測任務的檔案整理成 TaskData：
1. SMCD：情感 TSV / CSV；先做語料內去重
2. BMC、NEMO：token 級 CoNLL；BIO 違規預設自動修復
3. 缺少 valid 時從 train 切出（carve_validation）；只給單一檔案時做三向切分
4. 給了分詞器時，依三個切分的 token 長度選出序列長度 bucket

目錄結構：
    <dir>/train.tsv  <dir>/valid.tsv  <dir>/test.tsv     （SMCD，valid 可省略，也接受 dev）
    <dir>/train.conll <dir>/valid.conll <dir>/test.conll （BMC / NEMO）
    <dir>/all.tsv 或 <dir>/all.conll                      （單一檔案）
"""

import logging
from pathlib import Path
from typing import Dict, Mapping, Optional, Union

from ..benchmarks import (
    LABELS,
    SplitSpec,
    audit_leakage,
    carve_validation,
    deduplicate_samples,
    load_conll,
    load_sentiment,
    split_dataset,
)
from ..core.errors import AppException, ErrorCode
from ..metrics import length_stats, measure_lengths, select_bucket
from .trial import Task, TaskData

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

TASK_SUFFIXES = {
    Task.SMCD: (".tsv", ".csv"),
    Task.BMC: (".conll", ".bio", ".txt"),
    Task.NEMO: (".conll", ".bio", ".txt"),
}
SPLIT_ALIASES = {"train": "train", "valid": "valid", "dev": "valid", "test": "test", "all": "all"}


def discover_task_files(directory: PathLike, task) -> Dict[str, Path]:
    task = Task(task)
    directory = Path(directory)
    found: Dict[str, Path] = {}
    for stem, split in SPLIT_ALIASES.items():
        for suffix in TASK_SUFFIXES[task]:
            candidate = directory / f"{stem}{suffix}"
            if candidate.is_file() and split not in found:
                found[split] = candidate
    if not found:
        raise AppException(
            ErrorCode.NOT_FOUND,
            message_en=f"no {task.value} data files in {directory}",
            detail={"directory": str(directory), "task": task.value},
        )
    return found


def _loader(task: Task, repair: bool):
    if task is Task.SMCD:
        return lambda path: load_sentiment(path, audit=False)
    return lambda path: load_conll(path, repair=repair)


def load_task_data(
    task,
    paths: Union[PathLike, Mapping[str, PathLike]],
    *,
    spec: Optional[SplitSpec] = None,
    repair: bool = True,
    tokenizer=None,
) -> TaskData:
    """
    讀取任務資料

    Args:
        task: BMC、NEMO 或 SMCD
        paths: 資料目錄，或 split 名稱（train/valid/test/all）到檔案的對照
        spec: 切分設定（種子與比例）
        repair: CoNLL 的 BIO 違規是否自動修復
        tokenizer: 用來量測長度的分詞器；省略時 sequence_length 為 None

    Returns:
        TaskData: 三個切分與標籤集合
    """
    task = Task(task)
    spec = spec or SplitSpec()
    if not isinstance(paths, Mapping):
        paths = discover_task_files(paths, task)
    paths = {SPLIT_ALIASES.get(k, k): Path(v) for k, v in paths.items()}
    load = _loader(task, repair)

    if "all" in paths:
        samples = load(paths["all"])
        if task is Task.SMCD:
            samples, _ = deduplicate_samples(samples)
        if not any(getattr(s, "split", None) == "test" for s in samples):
            spec = spec.model_copy(update={"official_test": False})
        splits = split_dataset(samples, spec)
    else:
        missing = [name for name in ("train", "test") if name not in paths]
        if missing:
            raise AppException(
                ErrorCode.NOT_FOUND,
                message_en=f"{task.value} data needs train and test files, missing {missing}",
                detail={"missing": missing},
            )
        splits = {name: load(path) for name, path in paths.items() if name in ("train", "valid", "test")}
        if "valid" not in splits:
            splits["train"], splits["valid"] = carve_validation(splits["train"], spec)

    report = audit_leakage(splits)
    if report.count:
        logger.warning(f"Cross-split duplicates in {task.value}: collisions={report.count}")

    if task is Task.SMCD:
        labels = LABELS
    else:
        tags = {tag for part in splits.values() for sentence in part for tag in sentence.tags}
        labels = ("O",) + tuple(sorted(tags - {"O"}))
    data = TaskData(
        task=task,
        train=splits["train"],
        valid=splits["valid"],
        test=splits["test"],
        labels=labels,
        sources={name: str(path) for name, path in paths.items()},
    )
    if tokenizer is not None:
        data.sequence_length = measure_sequence_length(data, tokenizer)
    logger.info(f"Loaded task data: task={task.value} counts={data.counts()} labels={len(labels)}")
    return data


def measure_sequence_length(data: TaskData, tokenizer, step: Optional[int] = None) -> int:
    """Bucket covering the tokenized samples of every split, sentence markers included."""
    texts = [sample.text for split in ("train", "valid", "test") for sample in data.split(split)]
    stats = length_stats(measure_lengths(texts, tokenizer))
    bucket = select_bucket([stats], step)
    logger.info(f"Measured sequence length: task={data.task.value} p95={stats.p95} max={stats.max} bucket={bucket}")
    return bucket
