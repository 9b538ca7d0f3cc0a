"""
命令行入口的统一异常出口：任意异常 -> (退出码, 错误字典)，并记录日志
"""

import logging
from typing import Any

from rest_framework.exceptions import ValidationError as DRFValidationError

from .base import ArsrException, ExceptionContext, error_payload
from .codes import StandardErrorCodes

logger = logging.getLogger(__name__)


def first_drf_message(detail: Any) -> str:
    """DRF 错误详情中的第一条消息，嵌套字段以 'a: b: reason' 表示"""
    if isinstance(detail, dict) and detail:
        key, value = next(iter(detail.items()))
        return f"{key}: {first_drf_message(value)}"
    if isinstance(detail, list | tuple) and detail:
        return first_drf_message(detail[0])
    return str(detail)


def handle_exception(exc: Exception, trace_id: str | None = None) -> tuple[int, dict]:
    """
    :param trace_id: 非 ArsrException 时使用；不传则取当前 trace 作用域
    """
    if isinstance(exc, ArsrException):
        exc.log(logger)
        return exc.exit_code, exc.to_dict()

    context = ExceptionContext(trace_id=trace_id) if trace_id else ExceptionContext()
    if isinstance(exc, DRFValidationError):
        error_code = StandardErrorCodes.VALIDATION_ERROR
        message = first_drf_message(exc.detail)
        logger.warning("[trace_id=%s] [%s] %s", context.trace_id, error_code.code, message)
    else:
        error_code = StandardErrorCodes.INTERNAL_ERROR
        message = str(exc) or error_code.default_message
        logger.error("[trace_id=%s] [%s] %s", context.trace_id, error_code.code, message, exc_info=exc)

    return int(error_code.exit_code), error_payload(type(exc).__name__, error_code, message, context)
