"""
ARSR Exceptions Module

功能特性:
- 分层架构的异常类体系
- 可扩展的错误码系统，错误码绑定命令行退出码
- 自动 trace_id 追踪

Example:
    from arsr.exceptions import ShapeError, FormatError

    raise ShapeError("add", expected=(1, 1, 4, 4), actual=(1, 1, 4, 5))
"""

# Base - 基础异常类与 trace 作用域
from arsr.exceptions.base import (
    ArsrException,
    ExceptionContext,
    current_trace_id,
    trace,
)

# Error Codes - 错误码系统
from arsr.exceptions.codes import (
    ErrorCode,
    ErrorCodeRegistry,
    ExitCode,
    StandardErrorCodes,
)

# Validation Exceptions - 参数验证异常
from arsr.exceptions.validation import (
    ValidationException,
    ParameterInvalidError,
    ValueOutOfRangeError,
)

# Numeric Exceptions - 数值契约异常
from arsr.exceptions.numeric import (
    ShapeError,
    ContractError,
    DataError,
)

# File Exceptions - 文件与外部程序异常
from arsr.exceptions.files import (
    FileAccessError,
    FormatError,
    VersionMismatchError,
    EncoderNotFoundError,
)

# Handlers - 统一异常出口
from arsr.exceptions.handlers import handle_exception

__all__ = [
    "ArsrException",
    "ExceptionContext",
    "current_trace_id",
    "trace",
    "ErrorCode",
    "ErrorCodeRegistry",
    "ExitCode",
    "StandardErrorCodes",
    "ValidationException",
    "ParameterInvalidError",
    "ValueOutOfRangeError",
    "ShapeError",
    "ContractError",
    "DataError",
    "FileAccessError",
    "FormatError",
    "VersionMismatchError",
    "EncoderNotFoundError",
    "handle_exception",
]
