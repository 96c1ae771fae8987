"""
Pre-splitter

把原始文字切成不跨詞界的片段，BPE 合併只在片段內發生：
- 任意文字系統的字母串（含附加符號，例如希伯來文的母音點）
- 數字串
- 單一標點符號
- 空白：單一前導空格附在下一個片段上，其餘空白自成片段

片段依序串接後必定還原原文。
"""

from typing import List

import regex

PRE_SPLIT_PATTERN = regex.compile(
    r""" ?\p{L}[\p{L}\p{M}]*| ?\p{N}+| ?[^\s\p{L}\p{N}]|\s+(?!\S)|\s+"""
)


def pre_split(text: str) -> List[str]:
    return PRE_SPLIT_PATTERN.findall(text)
