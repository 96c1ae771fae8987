"""
結果報表

這個模組負責：
1. 結果表：每個模型一列，欄位 BMC、NEMO、NER AVG、SMCD、AVG；
   數字一律是確認訓練（role=selected）的 test 分數 × 100，保留兩位小數（四捨五入）
2. 標記：同一 size_class 內每欄最佳值粗體、次佳值底線
3. 超參數表：每個模型、每個任務被選中的 batch size 與 learning rate
4. 訓練時間：各任務與總計的 H:MM
"""

import csv
import io
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

from ..core.errors import ErrorCode, raise_validation_error
from ..databases import get_trial_journal
from ..metrics.scores import as_percentage, format_score, round_half_up, to_fraction, unweighted_mean
from .trial import TASK_ORDER, Task, TrialRecord, TrialRole

logger = logging.getLogger(__name__)

REPORT_FORMATS = ("md", "csv")
REPORT_KINDS = ("results", "hyperparameters", "walltime")
NER_AVG = "NER AVG"
AVG = "AVG"
MISSING = "-"


@dataclass
class ResultRow:
    model: str
    size_class: str
    cells: Dict[str, Optional[Fraction]] = field(default_factory=dict)


@dataclass
class ResultsTable:
    columns: List[str]
    rows: List[ResultRow]

    def cell(self, model: str, column: str) -> Optional[Fraction]:
        for row in self.rows:
            if row.model == model:
                return row.cells.get(column)
        return None


def load_records(journal_paths: Iterable[Union[str, Path]]) -> List[TrialRecord]:
    records = []
    for path in journal_paths:
        records.extend(TrialRecord.from_entry(e) for e in get_trial_journal(path).entries())
    return records


def _selected(records: Iterable[TrialRecord]) -> Dict[Tuple[str, Task], TrialRecord]:
    chosen: Dict[Tuple[str, Task], TrialRecord] = {}
    for record in records:
        if record.role is not TrialRole.SELECTED or record.test_score is None:
            continue
        key = (record.config.model, record.config.task)
        if key in chosen:
            logger.warning(f"Several selected trials for model={key[0]} task={key[1].value}; keeping the first")
            continue
        chosen[key] = record
    return chosen


def build_results_table(records: Iterable[TrialRecord]) -> ResultsTable:
    """
    Test scores of the validation-selected trials, as percentages.

    Grid trials are ignored even when they carry a test score.
    """
    chosen = _selected(records)
    present = {task for _, task in chosen}
    columns: List[str] = []
    for task in TASK_ORDER:
        if task in present:
            columns.append(task.value)
        if task is Task.NEMO and {Task.BMC, Task.NEMO} <= present:
            columns.append(NER_AVG)
    if set(TASK_ORDER) <= present:
        columns.append(AVG)

    rows: Dict[str, ResultRow] = {}
    for (model, task), record in chosen.items():
        row = rows.setdefault(model, ResultRow(model, record.config.size_class))
        row.cells[task.value] = as_percentage(record.test_score)

    for row in rows.values():
        ner = [row.cells.get(t.value) for t in (Task.BMC, Task.NEMO)]
        if NER_AVG in columns:
            row.cells[NER_AVG] = unweighted_mean(ner) if None not in ner else None
        overall = [row.cells.get(t.value) for t in TASK_ORDER]
        if AVG in columns:
            row.cells[AVG] = unweighted_mean(overall) if None not in overall else None
    return ResultsTable(columns, list(rows.values()))


def rank_marks(table: ResultsTable, places: int = 2) -> Dict[Tuple[str, str], str]:
    """
    (model, column) -> "best" / "second" within each size class.

    Ranking uses the displayed value, so scores equal at two decimals share a mark.
    """
    marks: Dict[Tuple[str, str], str] = {}
    scale = 10**places
    classes = sorted({row.size_class for row in table.rows})
    for size_class in classes:
        group = [row for row in table.rows if row.size_class == size_class]
        if len(group) < 2:
            continue
        for column in table.columns:
            shown = {
                row.model: round_half_up(row.cells[column] * scale)
                for row in group
                if row.cells.get(column) is not None
            }
            levels = sorted(set(shown.values()), reverse=True)
            for model, value in shown.items():
                if value == levels[0]:
                    marks[(model, column)] = "best"
                elif len(levels) > 1 and value == levels[1]:
                    marks[(model, column)] = "second"
    return marks


def _decorate(text: str, mark: Optional[str], fmt: str) -> str:
    if mark is None:
        return text
    if fmt == "md":
        return f"**{text}**" if mark == "best" else f"<u>{text}</u>"
    return f"\\textbf{{{text}}}" if mark == "best" else f"\\underline{{{text}}}"


def _markdown(header: Sequence[str], body: Sequence[Sequence[str]], numeric_from: int) -> str:
    lines = ["| " + " | ".join(header) + " |"]
    lines.append("|" + "|".join("---" if i < numeric_from else "---:" for i in range(len(header))) + "|")
    for row in body:
        lines.append("| " + " | ".join(row) + " |")
    return "\n".join(lines) + "\n"


def _csv(header: Sequence[str], body: Sequence[Sequence[str]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(body)
    return buffer.getvalue()


def render_results(table: ResultsTable, fmt: str = "md", places: int = 2) -> str:
    marks = rank_marks(table, places)
    header = ["Model", "Size"] + table.columns
    body = []
    for row in table.rows:
        cells = [row.model, row.size_class]
        for column in table.columns:
            value = row.cells.get(column)
            text = MISSING if value is None else format_score(value, places)
            cells.append(_decorate(text, marks.get((row.model, column)) if value is not None else None, fmt))
        body.append(cells)
    return _markdown(header, body, 2) if fmt == "md" else _csv(header, body)


def format_learning_rate(learning_rate: float) -> str:
    """2e-05 -> "2e-5", 5e-06 -> "5e-6"."""
    mantissa, exponent = f"{learning_rate:.0e}".split("e")
    if to_fraction(f"{mantissa}e{exponent}") != to_fraction(learning_rate):
        mantissa, exponent = f"{learning_rate:e}".split("e")
        mantissa = mantissa.rstrip("0").rstrip(".")
    return f"{mantissa}e{int(exponent)}"


def render_hyperparameters(records: Iterable[TrialRecord], fmt: str = "md") -> str:
    chosen = _selected(records)
    tasks = [t for t in TASK_ORDER if any(task is t for _, task in chosen)]
    header = ["Model"]
    for task in tasks:
        header += [f"{task.value} BS", f"{task.value} LR"]
    models = list(dict.fromkeys(model for model, _ in chosen))
    body = []
    for model in models:
        cells = [model]
        for task in tasks:
            record = chosen.get((model, task))
            if record is None:
                cells += [MISSING, MISSING]
            else:
                cells += [str(record.config.batch_size), format_learning_rate(record.config.learning_rate)]
        body.append(cells)
    return _markdown(header, body, 1) if fmt == "md" else _csv(header, body)


@dataclass
class WallTimeSummary:
    per_task_ms: Dict[str, int]

    @property
    def total_ms(self) -> int:
        return sum(self.per_task_ms.values())

    def rows(self) -> List[Tuple[str, str]]:
        rows = [(task, format_duration(ms)) for task, ms in self.per_task_ms.items()]
        rows.append(("Total", format_duration(self.total_ms)))
        return rows


def format_duration(ms: int) -> str:
    """Milliseconds as H:MM, minutes rounded half-up."""
    if ms < 0:
        raise_validation_error("wall_time_ms", "時間不可為負數", f"duration must be non-negative, got {ms}")
    hours, minutes = divmod(round_half_up(Fraction(ms, 60_000)), 60)
    return f"{hours}:{minutes:02d}"


def track_wall_time(records: Iterable[TrialRecord], tasks: Sequence[Task] = TASK_ORDER) -> WallTimeSummary:
    """Sum of every trial's wall time, grid and confirmation runs alike."""
    per_task = {Task(t).value: 0 for t in tasks}
    for record in records:
        name = record.config.task.value
        if name in per_task:
            per_task[name] += record.wall_time_ms
    return WallTimeSummary(per_task)


def render_wall_time(summary: WallTimeSummary, fmt: str = "md") -> str:
    body = [list(row) for row in summary.rows()]
    header = ["Task", "Time"]
    return _markdown(header, body, 1) if fmt == "md" else _csv(header, body)


def emit_report(
    records: Iterable[TrialRecord],
    kind: str = "results",
    fmt: str = "md",
    path: Optional[Union[str, Path]] = None,
) -> str:
    """
    產生報表文字，指定 path 時同時寫入檔案

    Args:
        records: 日誌中的試驗紀錄
        kind: results / hyperparameters / walltime
        fmt: md 或 csv（csv 以 LaTeX 指令標記最佳與次佳）
        path: 輸出檔案

    Returns:
        str: 報表內容
    """
    if kind not in REPORT_KINDS:
        raise_validation_error("kind", "未知的報表種類", f"kind must be one of {REPORT_KINDS}", ErrorCode.VALIDATION_ERROR)
    if fmt not in REPORT_FORMATS:
        raise_validation_error("format", "未知的報表格式", f"format must be one of {REPORT_FORMATS}", ErrorCode.VALIDATION_ERROR)
    records = list(records)
    if kind == "results":
        text = render_results(build_results_table(records), fmt)
    elif kind == "hyperparameters":
        text = render_hyperparameters(records, fmt)
    else:
        text = render_wall_time(track_wall_time(records), fmt)
    if path is not None:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_text(text, encoding="utf-8")
        logger.info(f"Report written: kind={kind} format={fmt} path={path}")
    return text
