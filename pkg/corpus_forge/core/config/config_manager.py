"""
預設常量管理器

這個模組負責統一管理打包在 core/data 下的 JSON 常量，包括：
1. 特殊 token 清單
2. 學習率排程預設
3. 微調超參數網格
4. 任務評估指標與序列長度
5. 情感標籤別名

所有模組都經由 config_manager 讀取這些常量，避免在程式碼中散落魔法數字。
"""

import json
import logging
import os
from typing import Any, Dict, List, Tuple

logger = logging.getLogger(__name__)


class ConfigManager:
    """
    常量管理器，延遲載入 constants.json
    """

    def __init__(self):
        self.config_dir = os.path.dirname(__file__)
        self.data_dir = os.path.join(os.path.dirname(self.config_dir), 'data')
        self._constants = None

    def _load_json_file(self, filename: str) -> Dict[str, Any]:
        """
        載入 JSON 常量文件

        Args:
            filename (str): 文件名

        Returns:
            Dict[str, Any]: 常量數據
        """
        file_path = os.path.join(self.data_dir, filename)
        with open(file_path, 'r', encoding='utf-8') as f:
            data = json.load(f)
            logger.debug(f"成功載入常量文件: {filename}")
            return data

    @property
    def constants(self) -> Dict[str, Any]:
        if self._constants is None:
            self._constants = self._load_json_file('constants.json')
        return self._constants

    def get_constant(self, key: str) -> Any:
        """
        獲取特定常量

        Args:
            key (str): 常量鍵名

        Returns:
            Any: 常量值
        """
        return self.constants.get(key)

    def get_special_tokens(self) -> List[Tuple[str, str]]:
        """特殊 token 依 id 順序排列的 (角色, 字串) 清單"""
        return [(role, token) for role, token in self.constants["SPECIAL_TOKENS"]]

    def get_schedule_preset(self, name: str) -> Dict[str, Any]:
        presets = self.constants.get("SCHEDULE_PRESETS", {})
        if name not in presets:
            raise KeyError(f"unknown schedule preset: {name}")
        return dict(presets[name])

    def get_grid(self) -> Dict[str, Any]:
        return dict(self.constants["FINETUNE_GRID"])

    def get_task_metric(self, task: str) -> str:
        return self.constants["TASK_METRICS"][task]

    def get_task_sequence_length(self, task: str) -> int:
        return int(self.constants["TASK_SEQUENCE_LENGTHS"][task])

    def get_label_aliases(self) -> Dict[str, str]:
        return dict(self.constants["SENTIMENT_LABEL_ALIASES"])

    def get_model_shape(self, name: str) -> Dict[str, Any]:
        return dict(self.constants["MODEL_SHAPES"][name])


# 全局常量管理器實例
config_manager = ConfigManager()
