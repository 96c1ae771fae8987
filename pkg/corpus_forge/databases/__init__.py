"""
數據庫模組 (Databases Module)

目前只有試驗日誌 (trial_journal.py)：
- 以 JSONL 追加寫入每次試驗的結果
- 以 (config_hash, role) 為鍵，重複寫入即略過，支援中斷後續跑
- 透過 get_trial_journal() 取得每個檔案唯一的實例
"""

from .trial_journal import TrialJournal, get_trial_journal

__all__ = [
    'TrialJournal',
    'get_trial_journal',
]
