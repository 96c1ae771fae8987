"""
Base Trainer Module

This module defines the abstract base class every fine-tuning backend
implements and the factory the harness uses to create them by name.
"""

import json
import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import TYPE_CHECKING, Any, Dict, List, Optional

from ...core.errors import ErrorCode, raise_not_found
from ...pretrain.schedule import ScheduleSpec, lr_at

if TYPE_CHECKING:
    from ...tuning.trial import TaskData, TrialConfig

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EpochContext:
    """Position of one epoch inside the trial's learning-rate schedule."""

    epoch: int
    first_step: int
    steps_per_epoch: int
    schedule: ScheduleSpec

    def lr(self, step_in_epoch: int) -> float:
        return lr_at(self.first_step + step_in_epoch, self.schedule)


class BaseTrainer(ABC):
    """
    Abstract base class for trainers

    A trainer turns a TrialConfig plus TaskData into a model state one epoch
    at a time and scores that state on a split. Given the same config seed
    and data it must be deterministic; ``evaluate`` must not modify state.
    """

    supports_concurrency: bool = True

    def __init__(self, options: Optional[Dict[str, Any]] = None):
        self.options = options or {}

    @property
    @abstractmethod
    def trainer_name(self) -> str:
        """Return the registry name (e.g. 'mock', 'probe')"""
        pass

    @abstractmethod
    def init_state(self, config: "TrialConfig", data: "TaskData") -> Any:
        """Return the untrained model state"""
        pass

    @abstractmethod
    def train_one_epoch(self, state: Any, config: "TrialConfig", data: "TaskData", context: EpochContext) -> Any:
        """Train for one epoch and return the new state"""
        pass

    @abstractmethod
    def evaluate(self, state: Any, config: "TrialConfig", data: "TaskData", split: str) -> float:
        """Score the state on ``split`` with ``config.metric``"""
        pass

    def simulated_epoch_ms(self, config: "TrialConfig", data: "TaskData") -> Optional[int]:
        """Fixed per-epoch duration for simulated trainers; None means measure real time."""
        return None

    def get_option(self, key: str, default: Any = None) -> Any:
        return self.options.get(key, default)


class TrainerFactory:
    """
    Registry of trainer classes

    Instances are cached per (name, options) so repeated trials reuse
    loaded resources such as tokenizers.
    """

    _trainers: Dict[str, type] = {}
    _instances: Dict[str, BaseTrainer] = {}

    @classmethod
    def register_trainer(cls, name: str, trainer_class: type):
        cls._trainers[name.lower()] = trainer_class
        logger.debug(f"Registered trainer: {name}")

    @classmethod
    def get_trainer(cls, name: str, options: Optional[Dict[str, Any]] = None) -> BaseTrainer:
        name = name.lower()
        if name not in cls._trainers:
            cls._auto_register_trainers()
            if name not in cls._trainers:
                raise_not_found("Trainer", name, ErrorCode.TRAINER_NOT_FOUND)

        instance_key = f"{name}:{json.dumps(options or {}, sort_keys=True, default=str)}"
        if instance_key not in cls._instances:
            cls._instances[instance_key] = cls._trainers[name](options=options)
        return cls._instances[instance_key]

    @classmethod
    def get_available_trainers(cls) -> List[str]:
        cls._auto_register_trainers()
        return sorted(cls._trainers)

    @classmethod
    def _auto_register_trainers(cls):
        if "mock" not in cls._trainers:
            from .mock_trainer import MockTrainer
            cls.register_trainer("mock", MockTrainer)
        if "probe" not in cls._trainers:
            from .probe_trainer import ProbeTrainer
            cls.register_trainer("probe", ProbeTrainer)

    @classmethod
    def clear_cache(cls):
        cls._instances.clear()
