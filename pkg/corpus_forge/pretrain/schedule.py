"""
學習率排程

warmup 期間由 0 線性升到 peak_lr，其後以多項式衰減到 end_lr：

    lr = (peak_lr - end_lr) * ((total - step) / (total - warmup)) ** power + end_lr

power = 1 即微調用的線性排程。預設值從 constants.json 的 SCHEDULE_PRESETS 讀取；
finetune 預設的總步數隨試驗而定，warmup 取總步數的 10%。
"""

import csv
import logging
from enum import Enum
from pathlib import Path
from typing import List, Optional, Tuple, Union

from pydantic import BaseModel, ValidationError, model_validator

from ..core.config import config_manager
from ..core.errors import AppException, ErrorCode
from ..metrics.scores import round_half_up, to_fraction

logger = logging.getLogger(__name__)


class ScheduleKind(str, Enum):
    POLYNOMIAL_DECAY = "polynomial_decay"
    LINEAR = "linear"


class ScheduleSpec(BaseModel):
    kind: ScheduleKind = ScheduleKind.POLYNOMIAL_DECAY
    total_steps: int
    warmup_steps: int
    peak_lr: float
    end_lr: float = 0.0
    power: float = 1.0

    @model_validator(mode="after")
    def _check(self):
        if not 0 <= self.warmup_steps < self.total_steps:
            raise ValueError(f"need 0 <= warmup_steps < total_steps, got {self.warmup_steps}/{self.total_steps}")
        if not self.peak_lr > self.end_lr >= 0:
            raise ValueError(f"need peak_lr > end_lr >= 0, got {self.peak_lr}/{self.end_lr}")
        if self.power <= 0:
            raise ValueError(f"power must be positive, got {self.power}")
        return self

    @classmethod
    def build(cls, **values) -> "ScheduleSpec":
        try:
            return cls(**values)
        except ValidationError as e:
            raise AppException(ErrorCode.SCHEDULE_INVALID, message_en=str(e), detail=values) from e

    @property
    def effective_power(self) -> float:
        return 1.0 if self.kind is ScheduleKind.LINEAR else self.power


def lr_at(step: int, spec: ScheduleSpec) -> float:
    if step < 0:
        raise AppException(ErrorCode.SCHEDULE_INVALID, message_en=f"step must be non-negative, got {step}")
    if step < spec.warmup_steps:
        return spec.peak_lr * step / spec.warmup_steps
    if step >= spec.total_steps:
        return spec.end_lr
    remaining = (spec.total_steps - step) / (spec.total_steps - spec.warmup_steps)
    return (spec.peak_lr - spec.end_lr) * remaining ** spec.effective_power + spec.end_lr


def preset(name: str, total_steps: Optional[int] = None, peak_lr: Optional[float] = None) -> ScheduleSpec:
    """
    Named schedule from SCHEDULE_PRESETS.

    ``finetune`` is sized by the run: it needs total_steps and goes through
    finetune_schedule. The pretraining presets accept total_steps and peak_lr
    as overrides.
    """
    try:
        values = config_manager.get_schedule_preset(name)
    except KeyError as e:
        raise AppException(ErrorCode.NOT_FOUND, message_en=str(e), detail={"preset": name}) from e
    if peak_lr is not None:
        values["peak_lr"] = peak_lr
    if "warmup_fraction" in values:
        if total_steps is None:
            raise AppException(
                ErrorCode.SCHEDULE_INVALID,
                message_en=f"preset {name} needs total_steps",
                detail={"preset": name},
            )
        return finetune_schedule(total_steps, values["peak_lr"], values["warmup_fraction"])
    if total_steps is not None:
        values["total_steps"] = total_steps
    return ScheduleSpec.build(**values)


def finetune_schedule(total_steps: int, peak_lr: float, warmup_fraction: float = 0.1) -> ScheduleSpec:
    """Linear decay with warmup = round(warmup_fraction × total_steps)."""
    if total_steps < 1:
        raise AppException(ErrorCode.SCHEDULE_INVALID, message_en=f"total_steps must be positive, got {total_steps}")
    warmup = round_half_up(to_fraction(warmup_fraction) * total_steps)
    return ScheduleSpec.build(
        kind=ScheduleKind.LINEAR,
        total_steps=total_steps,
        warmup_steps=min(warmup, total_steps - 1),
        peak_lr=peak_lr,
        end_lr=0.0,
        power=1.0,
    )


def schedule_rows(spec: ScheduleSpec, every: int = 1) -> List[Tuple[int, float]]:
    """(step, lr) rows from 0 to total_steps inclusive; the last step is always present."""
    if every < 1:
        raise AppException(ErrorCode.SCHEDULE_INVALID, message_en=f"every must be positive, got {every}")
    steps = list(range(0, spec.total_steps + 1, every))
    if steps[-1] != spec.total_steps:
        steps.append(spec.total_steps)
    return [(step, lr_at(step, spec)) for step in steps]


def write_schedule_csv(spec: ScheduleSpec, path: Union[str, Path], every: int = 1) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["step", "lr"])
        for step, lr in schedule_rows(spec, every):
            writer.writerow([step, repr(lr)])
    logger.info(f"Wrote schedule: path={path} total_steps={spec.total_steps} every={every}")
    return path
