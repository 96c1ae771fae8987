"""
數據文件模組

包含工具鏈使用的預設常量（特殊 token、排程預設、超參數網格等）。
"""
