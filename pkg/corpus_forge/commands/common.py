"""Helpers shared by the command modules."""

import json
import sys
from typing import Any, Iterator, List, Optional, Sequence

from ..core.errors import AppException, ErrorCode


def emit(payload: Any) -> None:
    """Write one JSON document to stdout."""
    sys.stdout.write(json.dumps(payload, ensure_ascii=False, indent=2, sort_keys=True, default=str) + "\n")


def require(value: Any, flag: str) -> Any:
    if value is None:
        raise AppException(ErrorCode.USAGE_ERROR, message_en=f"{flag} is required", detail={"flag": flag})
    return value


def parse_list(value: Any, cast=float) -> Optional[List]:
    """Comma-separated flag value, or a list coming from a config file."""
    if value is None:
        return None
    if isinstance(value, str):
        items = [v.strip() for v in value.split(",") if v.strip()]
    else:
        items = list(value)
    try:
        return [cast(v) for v in items]
    except (TypeError, ValueError) as e:
        raise AppException(ErrorCode.USAGE_ERROR, message_en=f"cannot parse list value {value!r}: {e}") from e


def iter_lines(paths: Sequence[str]) -> Iterator[str]:
    """Non-empty lines of UTF-8 text files, in file order."""
    for path in paths:
        try:
            with open(path, "r", encoding="utf-8") as handle:
                for line in handle:
                    line = line.rstrip("\n")
                    if line.strip():
                        yield line
        except OSError as e:
            raise AppException(ErrorCode.NOT_FOUND, message_en=f"cannot read {path}: {e}", detail={"path": str(path)}) from e
        except UnicodeDecodeError as e:
            raise AppException(ErrorCode.INVALID_UTF8, detail={"path": str(path), "offset": e.start}) from e
