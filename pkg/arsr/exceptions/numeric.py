"""
数值契约异常模块

张量形状、权重与配置不一致、前置条件不满足、非法数据等错误，
统一映射到退出码 4。
"""

from collections.abc import Sequence
from typing import Any

from .base import ArsrException
from .codes import StandardErrorCodes


def _fmt_shape(shape: Any) -> str:
    if isinstance(shape, Sequence) and not isinstance(shape, str):
        return "(" + ", ".join(str(s) for s in shape) + ")"
    return str(shape)


class ShapeError(ArsrException):
    """
    形状不匹配异常，消息中同时包含两侧形状

    Example:
        raise ShapeError("conv2d", expected=(1, 16, 8, 8), actual=(1, 3, 8, 8))
        # Message: "conv2d: shape mismatch, expected (1, 16, 8, 8), got (1, 3, 8, 8)"
    """

    default_error_code = StandardErrorCodes.SHAPE_ERROR

    def __init__(
        self,
        operation: str,
        expected: Any = None,
        actual: Any = None,
        reason: str | None = None,
        **kwargs,
    ):
        self._operation = operation
        self._expected = expected
        self._actual = actual

        message = f"{operation}: shape mismatch"
        if expected is not None:
            message = f"{message}, expected {_fmt_shape(expected)}"
        if actual is not None:
            message = f"{message}, got {_fmt_shape(actual)}"
        if reason:
            message = f"{message} ({reason})"
        super().__init__(
            message=message,
            data={"expected": expected, "actual": actual},
            **kwargs,
        )

    @property
    def operation(self) -> str:
        return self._operation

    @property
    def expected(self) -> Any:
        return self._expected

    @property
    def actual(self) -> Any:
        return self._actual


class ContractError(ArsrException):
    """前置条件或调用约定不满足"""

    default_error_code = StandardErrorCodes.CONTRACT_ERROR


class DataError(ArsrException):
    """数据非法（NaN/Inf、样本对尺寸不一致等）"""

    default_error_code = StandardErrorCodes.DATA_ERROR
