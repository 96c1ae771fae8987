"""
錯誤處理模組
"""

from .errors import (
    ErrorCode,
    AppException,
    handle_exception,
    raise_not_found,
    raise_validation_error,
    raise_parse_error,
    raise_operation_failed,
)

__all__ = [
    'ErrorCode',
    'AppException',
    'handle_exception',
    'raise_not_found',
    'raise_validation_error',
    'raise_parse_error',
    'raise_operation_failed',
]
