"""
错误码与退出码

错误码按千位分段：1000 系统、2000 参数、3000 文件与外部程序、4000 数值契约，
每个错误码绑定一个命令行退出码。自定义错误码从 5000 起注册：

    MY_ERROR = ErrorCodeRegistry.register(ErrorCode(5001, "Custom error", ExitCode.CONTRACT))
"""

from dataclasses import dataclass
from enum import IntEnum

MIN_ERROR_CODE = 1000


class ExitCode(IntEnum):
    """
    命令行退出码

        - 0: 成功
        - 1: 用法错误（参数校验失败、内部错误）
        - 2: I/O 错误（文件不可读写、外部程序缺失）
        - 3: 格式错误（文件头损坏、版本不匹配）
        - 4: 契约错误（形状、数据、前置条件）
    """

    OK = 0
    USAGE = 1
    IO = 2
    FORMAT = 3
    CONTRACT = 4


@dataclass(frozen=True)
class ErrorCode:
    """
    code: 错误码；default_message: 未给出消息时使用；exit_code: 退出码
    """

    code: int
    default_message: str
    exit_code: ExitCode = ExitCode.USAGE

    def __str__(self) -> str:
        return str(self.code)


class ErrorCodeRegistry:
    """进程内唯一的错误码表"""

    _codes: dict[int, ErrorCode] = {}

    @classmethod
    def register(cls, error_code: ErrorCode) -> ErrorCode:
        """
        :raises ValueError: 错误码已被占用，或小于 1000
        """
        if error_code.code < MIN_ERROR_CODE:
            raise ValueError(f"error codes start at {MIN_ERROR_CODE}, got {error_code.code}")
        existing = cls._codes.get(error_code.code)
        if existing is not None:
            raise ValueError(f"Error code {error_code.code} already registered as '{existing.default_message}'")
        cls._codes[error_code.code] = error_code
        return error_code

    @classmethod
    def get(cls, code: int) -> ErrorCode | None:
        return cls._codes.get(code)


class StandardErrorCodes:
    # 系统 1000
    INTERNAL_ERROR = ErrorCode(1000, "Internal error")

    # 参数 2000
    VALIDATION_ERROR = ErrorCode(2000, "Validation error")
    PARAMETER_INVALID = ErrorCode(2001, "Invalid parameter value")

    # 文件与外部程序 3000
    FILE_ACCESS_ERROR = ErrorCode(3000, "File access error", ExitCode.IO)
    FORMAT_ERROR = ErrorCode(3001, "Malformed file", ExitCode.FORMAT)
    VERSION_MISMATCH = ErrorCode(3002, "Unsupported file version", ExitCode.FORMAT)
    ENVIRONMENT_ERROR = ErrorCode(3003, "External program unavailable", ExitCode.IO)

    # 数值契约 4000
    SHAPE_ERROR = ErrorCode(4000, "Shape mismatch", ExitCode.CONTRACT)
    CONTRACT_ERROR = ErrorCode(4001, "Contract violated", ExitCode.CONTRACT)
    DATA_ERROR = ErrorCode(4002, "Invalid data", ExitCode.CONTRACT)


def _register_standard_codes() -> None:
    for value in vars(StandardErrorCodes).values():
        if isinstance(value, ErrorCode):
            ErrorCodeRegistry.register(value)


_register_standard_codes()
