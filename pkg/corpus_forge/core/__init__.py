"""
核心功能模組

這個包包含所有子模組共用的基礎組件：
- 環境預設與單次執行設定
- 打包的常量資料
- 統一錯誤處理
- 語料與標註檔案的串流讀取

組織結構：
├── config/          配置管理
│   ├── config.py           環境預設與 RunConfig
│   └── config_manager.py   常量管理器
├── processing/      檔案讀取
│   └── corpus_reader.py    JSONL / 純文字串流讀取
├── errors/          錯誤處理
│   └── errors.py           錯誤定義
└── data/            數據文件
    └── constants.json
"""

# ==================== 導出主要組件 ====================

from .config import Config, RunConfig, config_manager
from .errors import AppException, ErrorCode

__all__ = [
    'Config',
    'RunConfig',
    'config_manager',
    'AppException',
    'ErrorCode',
]
