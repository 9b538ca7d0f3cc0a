"""
ARSR 基础异常

每个异常绑定一个 ErrorCode（错误码 + 命令行退出码），并携带发生时的上下文。

一次命令行调用内的异常共享同一个 trace_id：入口处用 ``trace()`` 打开作用域，
线程池通过 contextvars 把它带进工作线程，因此逐帧并发处理中抛出的异常也能与
入口日志对上。
"""

import logging
import time
from collections.abc import Iterator
from contextlib import contextmanager
from contextvars import ContextVar
from dataclasses import asdict, dataclass, field
from typing import Any
from uuid import uuid4

from django.utils.translation import gettext as _

from .codes import ErrorCode, StandardErrorCodes

_current_trace_id: ContextVar[str | None] = ContextVar("arsr_trace_id", default=None)


def current_trace_id() -> str | None:
    return _current_trace_id.get()


@contextmanager
def trace(trace_id: str | None = None) -> Iterator[str]:
    """
    打开一个 trace 作用域

    with trace() as trace_id:
        UpscaleResource().request(...)
    """
    token = _current_trace_id.set(trace_id or uuid4().hex)
    try:
        yield _current_trace_id.get()
    finally:
        _current_trace_id.reset(token)


def _default_trace_id() -> str:
    return current_trace_id() or uuid4().hex


@dataclass(frozen=True)
class ExceptionContext:
    trace_id: str = field(default_factory=_default_trace_id)
    timestamp: float = field(default_factory=time.time)

    def to_dict(self) -> dict:
        return asdict(self)


def error_payload(
    type_name: str,
    error_code: ErrorCode,
    message: str,
    context: ExceptionContext,
    data: Any = None,
    **extra: Any,
) -> dict:
    """
    命令行与库调用方看到的统一错误结构

    extra 中值为空的键不输出（detail / field / errors 等）
    """
    error = {"type": type_name, **{k: v for k, v in extra.items() if v}, "context": context.to_dict()}
    return {
        "code": error_code.code,
        "exit_code": int(error_code.exit_code),
        "message": message,
        "data": data,
        "error": error,
    }


class ArsrException(Exception):
    """
    ARSR 异常基类

    Example:
        raise ArsrException("frame {index} failed", index=3)
        raise ArsrException(error_code=StandardErrorCodes.DATA_ERROR, detail="empty calibration set")
    """

    # 子类覆盖
    default_error_code: ErrorCode = StandardErrorCodes.INTERNAL_ERROR
    log_level: int = logging.ERROR

    def __init__(
        self,
        message: str | None = None,
        error_code: ErrorCode | None = None,
        detail: str | None = None,
        data: Any = None,
        cause: Exception | None = None,
        context: ExceptionContext | None = None,
        **format_kwargs: Any,
    ):
        self.error_code = error_code or self.default_error_code
        if message is None:
            message = _(self.error_code.default_message)
        elif format_kwargs:
            try:
                message = message.format(**format_kwargs)
            except (KeyError, IndexError):
                pass

        self.message = message
        self.detail = detail
        self.data = data
        self.context = context or ExceptionContext()
        super().__init__(message)
        if cause is not None:
            self.__cause__ = cause

    @property
    def code(self) -> int:
        return self.error_code.code

    @property
    def exit_code(self) -> int:
        return int(self.error_code.exit_code)

    def error_fields(self) -> dict[str, Any]:
        """error 字典中的附加字段，子类扩展"""
        return {"detail": self.detail}

    def to_dict(self) -> dict:
        return error_payload(
            type(self).__name__, self.error_code, self.message, self.context, self.data, **self.error_fields()
        )

    def log(self, logger: logging.Logger | None = None) -> None:
        (logger or logging.getLogger(__name__)).log(
            self.log_level,
            "[trace_id=%s] [%s] %s",
            self.context.trace_id,
            self.code,
            self.message,
            exc_info=self.__cause__,
        )

    def __str__(self) -> str:
        return f"[{self.code}] {self.message}"

    def __repr__(self) -> str:
        return f"{type(self).__name__}(code={self.code}, message={self.message!r})"
