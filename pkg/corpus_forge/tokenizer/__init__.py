"""
Byte-level BPE 分詞模組

提供詞表訓練、編碼 / 解碼與檔案讀寫。
"""

from .alphabet import ByteAlphabet, default_alphabet
from .bpe import ByteLevelBPETokenizer, decode, encode, inspect
from .pretokenizer import PRE_SPLIT_PATTERN, pre_split
from .serialization import load_tables, load_tokenizer, save_tokenizer, save_training_result
from .trainer import TrainingResult, count_pre_tokens, learn_merges, train, train_from_iterator
from .vocab import MergeTable, TokenSequence, Vocabulary

__all__ = [
    'ByteAlphabet',
    'default_alphabet',
    'ByteLevelBPETokenizer',
    'decode',
    'encode',
    'inspect',
    'PRE_SPLIT_PATTERN',
    'pre_split',
    'load_tables',
    'load_tokenizer',
    'save_tokenizer',
    'save_training_result',
    'TrainingResult',
    'count_pre_tokens',
    'learn_merges',
    'train',
    'train_from_iterator',
    'MergeTable',
    'TokenSequence',
    'Vocabulary',
]
