"""
文件与外部程序异常模块

提供文件读写、文件格式、版本以及外部编码器相关的异常类：
- FileAccessError: 文件不可读写（退出码 2）
- FormatError: 文件头或内容格式错误（退出码 3）
- VersionMismatchError: 权重文件版本不受支持（退出码 3）
- EncoderNotFoundError: 外部编码器程序缺失（退出码 2）
"""

import os

from .base import ArsrException
from .codes import StandardErrorCodes


class FileAccessError(ArsrException):
    """
    文件访问异常

    Example:
        raise FileAccessError(path="in.png", operation="read", cause=exc)
        # Message: "Cannot read file 'in.png'"
    """

    default_error_code = StandardErrorCodes.FILE_ACCESS_ERROR

    def __init__(self, path: str | os.PathLike, operation: str = "read", **kwargs):
        self._path = os.fspath(path)
        message = f"Cannot {operation} file '{self._path}'"
        super().__init__(message=message, data={"path": self._path}, **kwargs)

    @property
    def path(self) -> str:
        return self._path


class FormatError(ArsrException):
    """
    文件格式异常

    Example:
        raise FormatError(path="clip.y4m", reason="missing YUV4MPEG2 signature")
    """

    default_error_code = StandardErrorCodes.FORMAT_ERROR

    def __init__(self, path: str | os.PathLike | None = None, reason: str | None = None, **kwargs):
        self._path = os.fspath(path) if path is not None else None
        message = "Malformed file"
        if self._path:
            message = f"{message} '{self._path}'"
        if reason:
            message = f"{message}: {reason}"
        super().__init__(message=message, data={"path": self._path}, **kwargs)

    @property
    def path(self) -> str | None:
        return self._path


class VersionMismatchError(FormatError):
    """权重文件版本不受支持"""

    default_error_code = StandardErrorCodes.VERSION_MISMATCH

    def __init__(self, path: str | os.PathLike | None, version: str, supported: list[int], **kwargs):
        self._version = version
        reason = f"unsupported version {version!r}, supported: {', '.join(map(str, supported))}"
        super().__init__(path=path, reason=reason, **kwargs)

    @property
    def version(self) -> str:
        return self._version


class EncoderNotFoundError(ArsrException):
    """
    外部编码器缺失

    Example:
        raise EncoderNotFoundError(binary="ffmpeg")
        # Message: "External encoder 'ffmpeg' not found; set ARSR_ENCODER or install it"
    """

    default_error_code = StandardErrorCodes.ENVIRONMENT_ERROR

    def __init__(self, binary: str, env_var: str = "ARSR_ENCODER", **kwargs):
        self._binary = binary
        message = f"External encoder '{binary}' not found; set {env_var} or install it"
        super().__init__(message=message, data={"binary": binary}, **kwargs)

    @property
    def binary(self) -> str:
        return self._binary
