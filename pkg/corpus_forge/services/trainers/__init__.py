"""
Trainers Module

Pluggable fine-tuning backends behind one contract.
"""

from .base import BaseTrainer, EpochContext, TrainerFactory
from .mock_trainer import MockTrainer
from .probe_trainer import ProbeTrainer

__all__ = [
    'BaseTrainer',
    'EpochContext',
    'TrainerFactory',
    'MockTrainer',
    'ProbeTrainer',
]
