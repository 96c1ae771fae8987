"""
命令模組 (Commands Module)

每個檔案註冊一組子命令：
- corpus.py：語料匯入、去重、洗牌、取樣、合併
- bpe.py：BPE 詞表訓練與編碼
- data.py：評測資料載入、稽核、切分
- metrics.py：F1、長度統計、perplexity
- pretrain.py：打包、遮罩、學習率排程、訓練預算
- tune.py：網格微調與報表
"""

from . import bpe, corpus, data, metrics, pretrain, tune

COMMAND_GROUPS = (corpus, bpe, data, metrics, pretrain, tune)

__all__ = ['COMMAND_GROUPS']
