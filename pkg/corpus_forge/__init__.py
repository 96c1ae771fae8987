"""
Corpus Forge - corpus-to-benchmark toolkit

從原始語料到下游評測的一條龍工具：

- corpus: 語料匯入、精確去重、洗牌與按位元組取樣
- tokenizer: byte-level BPE 詞表訓練、編碼與解碼
- benchmarks: SMCD 情感資料與 BMC / NEMO NER 資料的讀取與切分
- metrics: span micro-F1、macro-F1、perplexity、序列長度統計與 bucket 選擇
- pretrain: MLM 資料打包與動態遮罩、學習率排程、epoch 預算
- tuning: 超參數 grid search、early stopping、結果報表
"""

# 版本信息
__version__ = "0.1.0"
