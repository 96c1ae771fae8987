"""
Trial models

TrialConfig identifies one fine-tuning run; its hash keys the journal.
TrialRecord is what the harness writes back after the run.
"""

import hashlib
import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence, Tuple

from pydantic import BaseModel, Field

from ..core.config import config_manager


class Task(str, Enum):
    BMC = "BMC"
    NEMO = "NEMO"
    SMCD = "SMCD"

    @property
    def is_tagging(self) -> bool:
        return self is not Task.SMCD


TASK_ORDER: Tuple[Task, ...] = (Task.BMC, Task.NEMO, Task.SMCD)


class StopReason(str, Enum):
    EARLY_STOP = "early_stop"
    EPOCH_CAP = "epoch_cap"
    ERROR = "error"


class TrialRole(str, Enum):
    GRID = "grid"
    SELECTED = "selected"


class TrialConfig(BaseModel):
    task: Task
    batch_size: int = Field(gt=0)
    learning_rate: float = Field(gt=0)
    max_epochs: int = Field(30, ge=1)
    patience: int = Field(3, ge=1)
    warmup_fraction: float = Field(0.1, ge=0, lt=1)
    sequence_length: int = Field(gt=0)
    seed: int = Field(ge=0)
    replicate: int = Field(0, ge=0)
    model: str = "default"
    size_class: str = "base"
    metric: str

    @property
    def config_hash(self) -> str:
        payload = json.dumps(self.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()

    @classmethod
    def for_task(cls, task: Task, data: Optional["TaskData"] = None, **values) -> "TrialConfig":
        """sequence_length: explicit value, else the bucket measured on ``data``, else the task default."""
        task = Task(task)
        if data is not None and data.sequence_length:
            values.setdefault("sequence_length", data.sequence_length)
        values.setdefault("sequence_length", config_manager.get_task_sequence_length(task.value))
        values.setdefault("metric", config_manager.get_task_metric(task.value))
        return cls(task=task, **values)


class TrialRecord(BaseModel):
    config: TrialConfig
    config_hash: str
    role: TrialRole = TrialRole.GRID
    trial_index: int = 0
    trainer: str = ""
    metric: str = ""
    per_epoch_valid_scores: List[float] = Field(default_factory=list)
    best_epoch: int = 0
    best_valid: Optional[float] = None
    test_score: Optional[float] = None
    stop_reason: StopReason
    epochs_run: int = 0
    wall_time_ms: int = 0
    error: Optional[str] = None

    @property
    def succeeded(self) -> bool:
        return self.stop_reason is not StopReason.ERROR and self.best_valid is not None

    def to_entry(self) -> Dict[str, Any]:
        return self.model_dump(mode="json")

    @classmethod
    def from_entry(cls, entry: Dict[str, Any]) -> "TrialRecord":
        return cls.model_validate(entry)


@dataclass
class TaskData:
    """
    Train / valid / test splits of one benchmark.

    Classification samples carry ``text`` and ``label``; tagging samples are
    TaggedSentence objects. ``labels`` lists class names or BIO tags.
    ``sequence_length`` is the length bucket measured with a tokenizer, if any.
    """

    task: Task
    train: Sequence[Any]
    valid: Sequence[Any]
    test: Sequence[Any]
    labels: Tuple[str, ...] = ()
    sources: Dict[str, str] = field(default_factory=dict)
    sequence_length: Optional[int] = None

    def split(self, name: str) -> Sequence[Any]:
        return {"train": self.train, "valid": self.valid, "test": self.test}[name]

    def counts(self) -> Dict[str, int]:
        return {"train": len(self.train), "valid": len(self.valid), "test": len(self.test)}
