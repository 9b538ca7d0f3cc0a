"""
用法错误（退出码 1）：命令行参数、请求数据与配置文件内容不合法

Example:
    raise ParameterInvalidError("chroma", reason="must be one of: nearest, bilinear, bicubic")
    raise ValueOutOfRangeError("bits", min_value=2, max_value=16, actual_value=20)
"""

import logging
from typing import Any

from .base import ArsrException
from .codes import StandardErrorCodes


class ValidationException(ArsrException):
    """
    field 为出错字段（只有一个字段出错时），errors 为 [{"field": ..., "errors": [...]}]
    """

    default_error_code = StandardErrorCodes.VALIDATION_ERROR
    log_level = logging.WARNING

    def __init__(
        self,
        message: str | None = None,
        field: str | None = None,
        errors: list[dict[str, Any]] | None = None,
        **kwargs,
    ):
        self.field = field
        self.errors = errors or []
        super().__init__(message=message, **kwargs)

    def error_fields(self) -> dict[str, Any]:
        return {**super().error_fields(), "field": self.field, "errors": self.errors}


class ParameterInvalidError(ValidationException):
    """Invalid value for parameter 'target_res': expected WIDTHxHEIGHT"""

    default_error_code = StandardErrorCodes.PARAMETER_INVALID

    def __init__(self, param_name: str, reason: str | None = None, **kwargs):
        message = f"Invalid value for parameter '{param_name}'" + (f": {reason}" if reason else "")
        super().__init__(message=message, field=param_name, **kwargs)


def _bound(value: Any, fallback: str) -> str:
    return fallback if value is None else str(value)


class ValueOutOfRangeError(ValidationException):
    """Parameter 'bits' value 20 is out of range [2, 16]"""

    default_error_code = StandardErrorCodes.PARAMETER_INVALID

    def __init__(
        self,
        param_name: str,
        min_value: Any | None = None,
        max_value: Any | None = None,
        actual_value: Any | None = None,
        **kwargs,
    ):
        value = "" if actual_value is None else f" value {actual_value}"
        message = (
            f"Parameter '{param_name}'{value} is out of range "
            f"[{_bound(min_value, '-inf')}, {_bound(max_value, '+inf')}]"
        )
        super().__init__(
            message=message,
            field=param_name,
            data={"min_value": min_value, "max_value": max_value, "actual_value": actual_value},
            **kwargs,
        )
