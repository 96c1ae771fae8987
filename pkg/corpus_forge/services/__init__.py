"""
服務模組

微調後端（trainers）。
"""
