"""
张量算子层

Tensor 即形状为 (batch, channels, height, width) 的 numpy 数组，默认 float32。
所有算子是输入的纯函数，保留输入的浮点精度（梯度检查时使用 float64）。

卷积固定 stride=1、零填充 same-padding，中间特征始终保持低分辨率尺寸；
depth_to_space 的通道排列规则与 model 模块末层卷积的通道语义一致：
输出像素 (y, x) 的输出通道 c 读取输入通道 c*r*r + (y % r)*r + (x % r)。
"""

from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from arsr.exceptions import ShapeError

Tensor = np.ndarray


def as_tensor(data, dtype=np.float32) -> Tensor:
    """
    转换为 4 维张量并校验维度

    :param data: 任意可转换为数组的数据
    :param dtype: 目标类型，None 表示保留输入的浮点类型
    """
    array = np.asarray(data)
    if dtype is not None:
        array = array.astype(dtype, copy=False)
    elif not np.issubdtype(array.dtype, np.floating):
        array = array.astype(np.float32)
    if array.ndim != 4:
        raise ShapeError("tensor", expected="(batch, channels, height, width)", actual=array.shape)
    if min(array.shape) < 1:
        raise ShapeError("tensor", actual=array.shape, reason="all dims must be >= 1")
    return array


def _float_type(*arrays: np.ndarray) -> np.dtype:
    return np.result_type(*(a.dtype for a in arrays), np.float32)


@dataclass(frozen=True, eq=False)
class ConvWeights:
    """
    卷积层参数

    kernels 形状为 (out_channels, in_per_group, f, f)，bias 形状为 (out_channels,)。
    """

    kernels: np.ndarray
    bias: np.ndarray
    groups: int = 1

    def __post_init__(self):
        kernels = np.asarray(self.kernels)
        bias = np.asarray(self.bias)
        if kernels.ndim != 4 or kernels.shape[2] != kernels.shape[3]:
            raise ShapeError("conv weights", expected="(m, n/g, f, f)", actual=kernels.shape)
        if kernels.shape[2] % 2 != 1:
            raise ShapeError("conv weights", actual=kernels.shape, reason="kernel size must be odd")
        if bias.shape != (kernels.shape[0],):
            raise ShapeError("conv bias", expected=(kernels.shape[0],), actual=bias.shape)
        if self.groups < 1 or kernels.shape[0] % self.groups:
            raise ShapeError(
                "conv weights",
                actual=kernels.shape,
                reason=f"groups={self.groups} must divide out_channels={kernels.shape[0]}",
            )
        object.__setattr__(self, "kernels", kernels)
        object.__setattr__(self, "bias", bias)

    @property
    def out_channels(self) -> int:
        return self.kernels.shape[0]

    @property
    def in_per_group(self) -> int:
        return self.kernels.shape[1]

    @property
    def in_channels(self) -> int:
        return self.kernels.shape[1] * self.groups

    @property
    def kernel_size(self) -> int:
        return self.kernels.shape[2]

    @property
    def shape(self) -> tuple[int, int, int, int]:
        return self.kernels.shape

    @property
    def param_count(self) -> int:
        return self.kernels.size + self.bias.size

    def astype(self, dtype) -> "ConvWeights":
        return ConvWeights(self.kernels.astype(dtype), self.bias.astype(dtype), self.groups)

    def equals(self, other: "ConvWeights") -> bool:
        return (
            self.groups == other.groups
            and np.array_equal(self.kernels, other.kernels)
            and np.array_equal(self.bias, other.bias)
        )


def pad_same(x: Tensor, f: int) -> Tensor:
    """零填充 (f-1)/2"""
    p = (f - 1) // 2
    if p == 0:
        return x
    return np.pad(x, ((0, 0), (0, 0), (p, p), (p, p)))


def windows(x: Tensor, f: int) -> np.ndarray:
    """same-padding 后的滑窗视图，形状 (batch, channels, height, width, f, f)"""
    return sliding_window_view(pad_same(x, f), (f, f), axis=(2, 3))


def conv2d(x: Tensor, w: ConvWeights) -> Tensor:
    """
    分组卷积（互相关），stride 1，零填充 same-padding

    :raises ShapeError: 输入通道数与 in_per_group * groups 不一致
    """
    if x.ndim != 4 or x.shape[1] != w.in_channels:
        raise ShapeError(
            "conv2d",
            expected=f"input channels {w.in_channels} (in_per_group={w.in_per_group} x groups={w.groups})",
            actual=f"input {tuple(x.shape)}, kernels {tuple(w.shape)}",
        )
    dtype = _float_type(x, w.kernels)
    x = x.astype(dtype, copy=False)
    kernels = w.kernels.astype(dtype, copy=False)
    view = windows(x, w.kernel_size)

    n_in, m_out = w.in_per_group, w.out_channels // w.groups
    outputs = []
    for k in range(w.groups):
        group_view = view[:, k * n_in : (k + 1) * n_in]
        group_kernels = kernels[k * m_out : (k + 1) * m_out]
        outputs.append(np.einsum("bchwij,ocij->bohw", group_view, group_kernels, optimize=True))
    out = outputs[0] if w.groups == 1 else np.concatenate(outputs, axis=1)
    out = out + w.bias.astype(dtype, copy=False)[None, :, None, None]
    return np.ascontiguousarray(out, dtype=dtype)


def relu(x: Tensor) -> Tensor:
    return np.maximum(x, 0).astype(x.dtype, copy=False)


def add(a: Tensor, b: Tensor) -> Tensor:
    if a.shape != b.shape:
        raise ShapeError("add", expected=a.shape, actual=b.shape)
    return a + b


def depth_to_space(x: Tensor, r: int) -> Tensor:
    """
    像素重排：(b, c*r*r, h, w) -> (b, c, h*r, w*r)

    :raises ShapeError: 通道数不能被 r*r 整除
    """
    b, c, h, w = x.shape
    if r < 1 or c % (r * r):
        raise ShapeError("depth_to_space", actual=x.shape, reason=f"channels not divisible by r*r={r * r}")
    out_c = c // (r * r)
    out = x.reshape(b, out_c, r, r, h, w).transpose(0, 1, 4, 2, 5, 3)
    return np.ascontiguousarray(out.reshape(b, out_c, h * r, w * r))


def space_to_depth(x: Tensor, r: int) -> Tensor:
    """depth_to_space 的逆排列（反向传播时使用）"""
    b, c, hr, wr = x.shape
    if hr % r or wr % r:
        raise ShapeError("space_to_depth", actual=x.shape, reason=f"spatial dims not divisible by r={r}")
    h, w = hr // r, wr // r
    out = x.reshape(b, c, h, r, w, r).transpose(0, 1, 3, 5, 2, 4)
    return np.ascontiguousarray(out.reshape(b, c * r * r, h, w))
