"""
Unified Error Handling Module

Centralized error codes and exception handling for the forge toolchain,
in the same enum-based style used across the codebase.

Features:
- ErrorCode enum for all error codes
- AppException custom exception class
- Structured error output and exit codes for the CLI
"""

import json
import logging
import sys
from enum import Enum
from typing import Any, Dict, List, Optional, TextIO

logger = logging.getLogger(__name__)

EXIT_FAILURE = 1
EXIT_USAGE = 2


# ==================== Error Codes Enum ====================

class ErrorCode(Enum):
    """
    Centralized error codes for the toolchain.

    Each error code contains:
    - code: Unique error code string
    - message: Default error message (Chinese)
    - message_en: Default error message (English)
    - exit_code: Process exit code when the error reaches the CLI

    Usage:
        raise AppException(ErrorCode.CORPUS_PATH_UNREADABLE, detail={"path": "a.jsonl"})
    """

    # ==================== General Errors (1000-1099) ====================
    INTERNAL_ERROR = ("E1000", "內部錯誤", "Internal error", EXIT_FAILURE)
    USAGE_ERROR = ("E1001", "命令列參數錯誤", "Invalid command-line usage", EXIT_USAGE)
    VALIDATION_ERROR = ("E1002", "資料驗證失敗", "Validation failed", EXIT_FAILURE)
    NOT_FOUND = ("E1003", "資源不存在", "Resource not found", EXIT_FAILURE)
    CONFIG_INVALID = ("E1004", "設定檔無效", "Invalid configuration file", EXIT_FAILURE)

    # ==================== Corpus Errors (2000-2099) ====================
    CORPUS_PATH_UNREADABLE = ("E2000", "語料檔案無法讀取", "Corpus path unreadable", EXIT_FAILURE)
    MANIFEST_INVALID = ("E2001", "語料清單無效", "Invalid corpus manifest", EXIT_FAILURE)
    SAMPLE_TARGET_INVALID = ("E2002", "取樣目標無效", "Invalid sampling target", EXIT_FAILURE)

    # ==================== Tokenizer Errors (3000-3099) ====================
    VOCAB_SIZE_INVALID = ("E3000", "詞表大小無效", "Invalid vocabulary size", EXIT_FAILURE)
    CORPUS_EMPTY = ("E3001", "訓練語料為空", "Training corpus is empty", EXIT_FAILURE)
    INVALID_UTF8 = ("E3002", "輸入不是有效的 UTF-8", "Input is not valid UTF-8", EXIT_FAILURE)
    TOKEN_ID_UNKNOWN = ("E3003", "未知的 token id", "Unknown token id", EXIT_FAILURE)
    TOKENIZER_FILE_MALFORMED = ("E3004", "詞表檔案格式錯誤", "Malformed tokenizer file", EXIT_FAILURE)

    # ==================== Benchmark Data Errors (4000-4099) ====================
    LABEL_UNKNOWN = ("E4000", "未知的標籤", "Unknown label", EXIT_FAILURE)
    CONLL_COLUMNS_MISMATCH = ("E4001", "CoNLL 欄位數不一致", "CoNLL column count mismatch", EXIT_FAILURE)
    BIO_INVALID = ("E4002", "BIO 標註不合法", "Invalid BIO tagging", EXIT_FAILURE)
    SPLIT_SPEC_INVALID = ("E4003", "切分設定無效", "Invalid split settings", EXIT_FAILURE)

    # ==================== Metrics Errors (5000-5099) ====================
    METRIC_INPUT_MISALIGNED = ("E5000", "評估輸入未對齊", "Metric inputs are misaligned", EXIT_FAILURE)
    METRIC_INPUT_EMPTY = ("E5001", "評估輸入為空", "Metric input is empty", EXIT_FAILURE)

    # ==================== Pretraining Prep Errors (6000-6099) ====================
    SCHEDULE_INVALID = ("E6000", "學習率排程無效", "Invalid learning-rate schedule", EXIT_FAILURE)
    BUDGET_INVALID = ("E6001", "訓練預算無效", "Invalid training budget", EXIT_FAILURE)

    # ==================== Tuning Errors (7000-7099) ====================
    TRAINER_NOT_FOUND = ("E7000", "訓練器不存在", "Trainer not found", EXIT_FAILURE)
    TRIAL_FAILED = ("E7001", "試驗執行失敗", "Trial failed", EXIT_FAILURE)
    NO_SUCCESSFUL_TRIAL = ("E7002", "沒有成功的試驗", "No successful trial to select", EXIT_FAILURE)
    JOURNAL_CORRUPT = ("E7003", "試驗日誌損毀", "Trial journal is corrupt", EXIT_FAILURE)
    GRID_INVALID = ("E7004", "超參數網格無效", "Invalid hyperparameter grid", EXIT_FAILURE)

    def __init__(self, code: str, message: str, message_en: str, exit_code: int):
        self._code = code
        self._message = message
        self._message_en = message_en
        self._exit_code = exit_code

    @property
    def code(self) -> str:
        """Return the error code string"""
        return self._code

    @property
    def message(self) -> str:
        """Return the default message (Chinese)"""
        return self._message

    @property
    def message_en(self) -> str:
        """Return the default message (English)"""
        return self._message_en

    @property
    def exit_code(self) -> int:
        """Return the process exit code"""
        return self._exit_code


# ==================== Custom Exception ====================

class AppException(Exception):
    """
    Custom application exception with error code support.

    Usage:
        raise AppException(ErrorCode.LABEL_UNKNOWN, detail={"row": 12, "label": "meh"})
        raise AppException(ErrorCode.CORPUS_EMPTY, message_en="no documents in manifest")
    """

    def __init__(
        self,
        error_code: ErrorCode,
        message: Optional[str] = None,
        message_en: Optional[str] = None,
        detail: Optional[Any] = None,
        errors: Optional[List[Dict[str, Any]]] = None,
    ):
        self.error_code = error_code
        self.message = message or error_code.message
        self.message_en = message_en or error_code.message_en
        self.detail = detail
        self.errors = errors
        self.exit_code = error_code.exit_code
        super().__init__(self.message_en)

    def __reduce__(self):
        # Worker processes send these back across the pool boundary.
        return (
            self.__class__,
            (self.error_code, self.message, self.message_en, self.detail, self.errors),
        )

    def to_dict(self) -> Dict[str, Any]:
        """Convert exception to a dictionary for structured output"""
        response = {
            "success": False,
            "error_code": self.error_code.code,
            "message": self.message,
            "message_en": self.message_en,
        }
        if self.detail is not None:
            response["detail"] = self.detail
        if self.errors is not None:
            response["errors"] = self.errors
        return response


# ==================== CLI Handler ====================

def handle_exception(exc: BaseException, stream: Optional[TextIO] = None) -> int:
    """
    Report an exception as one JSON line on stderr and return the exit code.

    AppException keeps its own code; anything else becomes E1000.
    """
    stream = stream or sys.stderr
    if isinstance(exc, AppException):
        logger.error(f"AppException: {exc.error_code.code} - {exc.message_en}", extra={"detail": exc.detail})
        payload = exc.to_dict()
        code = exc.exit_code
    else:
        logger.exception(f"Unhandled exception: {type(exc).__name__} - {exc}")
        payload = {
            "success": False,
            "error_code": ErrorCode.INTERNAL_ERROR.code,
            "message": ErrorCode.INTERNAL_ERROR.message,
            "message_en": ErrorCode.INTERNAL_ERROR.message_en,
            "detail": str(exc),
        }
        code = ErrorCode.INTERNAL_ERROR.exit_code
    stream.write(json.dumps(payload, ensure_ascii=False, default=str) + "\n")
    return code


# ==================== Helper Functions ====================

def raise_not_found(resource_type: str, resource_id: Any, error_code: Optional[ErrorCode] = None) -> None:
    """
    Helper to raise a not found exception.

    Usage:
        raise_not_found("Trainer", "gpu")
        raise_not_found("Trainer", "gpu", ErrorCode.TRAINER_NOT_FOUND)
    """
    code = error_code or ErrorCode.NOT_FOUND
    raise AppException(
        code,
        message=f"{resource_type} {resource_id} 不存在",
        message_en=f"{resource_type} {resource_id} not found",
        detail={f"{resource_type.lower()}_id": resource_id},
    )


def raise_validation_error(
    field: str,
    message: str,
    message_en: Optional[str] = None,
    error_code: Optional[ErrorCode] = None,
) -> None:
    """
    Helper to raise a validation error.

    Usage:
        raise_validation_error("target_bytes", "取樣目標必須為正數", "target_bytes must be positive")
    """
    raise AppException(
        error_code or ErrorCode.VALIDATION_ERROR,
        message_en=message_en or message,
        errors=[{
            "field": field,
            "message": message,
            "message_en": message_en or message,
        }],
    )


def raise_parse_error(path: Any, line: int, reason: str, error_code: ErrorCode) -> None:
    """
    Helper to raise a file parse error that names the offending line.

    Usage:
        raise_parse_error("merges.txt", 17, "expected 'left right'", ErrorCode.TOKENIZER_FILE_MALFORMED)
    """
    raise AppException(
        error_code,
        message=f"{path} 第 {line} 行: {reason}",
        message_en=f"{path}, line {line}: {reason}",
        detail={"path": str(path), "line": line, "reason": reason},
    )


def raise_operation_failed(
    operation: str,
    error_code: ErrorCode,
    original_error: Optional[Any] = None,
    detail: Optional[Dict[str, Any]] = None,
) -> None:
    """
    Helper to raise an operation failed exception.

    Usage:
        raise_operation_failed("confirm the selected trial", ErrorCode.TRIAL_FAILED, record.error)
    """
    detail = dict(detail or {})
    if original_error:
        detail["error"] = str(original_error)

    raise AppException(
        error_code,
        message=f"{operation} 失敗",
        message_en=f"Failed to {operation}",
        detail=detail or None,
    )
