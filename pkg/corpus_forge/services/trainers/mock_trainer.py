"""
Scripted trainer for exercising the harness.

Validation scores come from, in order of precedence:
- ``score_fn(config, epoch)`` passed in options (in-process only)
- ``curves``: "batch_size:learning_rate" -> list of per-epoch scores
  (the last value repeats once the list runs out; "*" matches any config)
- a fixed function of (batch size, learning rate) peaking at ``peak_epoch``
"""

import logging
import math
from typing import Any, Dict, Optional

from .base import BaseTrainer, EpochContext

logger = logging.getLogger(__name__)

DEFAULT_PEAK_EPOCH = 4
DEFAULT_EPOCH_MS = 60_000


def curve_key(batch_size: int, learning_rate: float) -> str:
    return f"{batch_size}:{learning_rate!r}"


def default_quality(batch_size: int, learning_rate: float) -> float:
    """Best reachable validation score: highest at lr 2e-5 with batch 16."""
    penalty = 0.02 * abs(math.log10(learning_rate / 2e-5)) + (0.01 if batch_size != 16 else 0.0)
    return 0.9 - penalty


class MockTrainer(BaseTrainer):
    def __init__(self, options: Optional[Dict[str, Any]] = None):
        super().__init__(options)
        self.score_fn = self.get_option("score_fn")
        self.curves = self.get_option("curves", {})
        self.fail = set(self.get_option("fail", []))
        self.peak_epoch = int(self.get_option("peak_epoch", DEFAULT_PEAK_EPOCH))
        self.test_offset = float(self.get_option("test_offset", -0.005))
        if self.score_fn is not None:
            self.supports_concurrency = False

    @property
    def trainer_name(self) -> str:
        return "mock"

    def valid_score(self, config, epoch: int) -> float:
        if self.score_fn is not None:
            return float(self.score_fn(config, epoch))
        curve = self.curves.get(curve_key(config.batch_size, config.learning_rate), self.curves.get("*"))
        if curve:
            return float(curve[min(epoch, len(curve)) - 1])
        quality = default_quality(config.batch_size, config.learning_rate)
        return round(quality - 0.01 * abs(epoch - self.peak_epoch), 6)

    def init_state(self, config, data) -> int:
        return 0

    def train_one_epoch(self, state: int, config, data, context: EpochContext) -> int:
        if curve_key(config.batch_size, config.learning_rate) in self.fail:
            raise RuntimeError(f"scripted failure for batch_size={config.batch_size} lr={config.learning_rate}")
        return state + 1

    def evaluate(self, state: int, config, data, split: str) -> float:
        score = self.valid_score(config, state)
        if split == "test":
            return round(score + self.test_offset, 6)
        return score

    def simulated_epoch_ms(self, config, data) -> Optional[int]:
        return int(self.get_option("epoch_ms", DEFAULT_EPOCH_MS))
