"""
配置管理模組
"""

from .config import Config, RunConfig, load_config_file
from .config_manager import config_manager

__all__ = ['Config', 'RunConfig', 'load_config_file', 'config_manager']
