"""
可分离插值重采样：nearest / bilinear / bicubic / lanczos

统一约定：
- 半像素中心坐标映射：src = (dst + 0.5) * (in / out) - 0.5
- 边缘处理：抽头下标截断到 [0, n-1]（clamp-to-edge）
- 每个轴构造一个 (out, in) 的权重矩阵，二维结果为 Wy @ plane @ Wx.T

Lanczos 的权重逐输出像素归一化（除以权重和），常数平面严格保持不变。
平面可以是二维数组，也可以是 (1, 1, h, w) 的张量，返回同样的维度。
"""

import logging
from collections.abc import Callable

import numpy as np

from arsr.exceptions import ContractError, ParameterInvalidError, ShapeError

logger = logging.getLogger(__name__)

METHODS = ("nearest", "bilinear", "bicubic", "lanczos")


def _as_plane(plane: np.ndarray) -> tuple[np.ndarray, bool]:
    array = np.asarray(plane)
    if array.ndim == 2:
        return array, False
    if array.ndim == 4 and array.shape[:2] == (1, 1):
        return array[0, 0], True
    raise ShapeError("resample", expected="(h, w) or (1, 1, h, w)", actual=array.shape)


def _check_target(out_res: tuple[int, int]) -> tuple[int, int]:
    width, height = (int(v) for v in out_res)
    if width < 1 or height < 1:
        raise ContractError(f"resample target must be non-empty, got {width}x{height}")
    return width, height


def source_coords(in_len: int, out_len: int) -> np.ndarray:
    """每个输出像素中心在输入坐标系中的位置"""
    return (np.arange(out_len, dtype=np.float64) + 0.5) * (in_len / out_len) - 0.5


# ========== 核函数 ==========


def linear_kernel(x: np.ndarray) -> np.ndarray:
    ax = np.abs(x)
    return np.where(ax < 1.0, 1.0 - ax, 0.0)


def cubic_kernel(x: np.ndarray, a: float = -0.5) -> np.ndarray:
    """三次卷积核，a = -0.5 为 Catmull-Rom"""
    ax = np.abs(x)
    ax2, ax3 = ax * ax, ax * ax * ax
    near = (a + 2) * ax3 - (a + 3) * ax2 + 1
    far = a * ax3 - 5 * a * ax2 + 8 * a * ax - 4 * a
    return np.where(ax <= 1.0, near, np.where(ax < 2.0, far, 0.0))


def lanczos_kernel(x: np.ndarray, a: int = 3) -> np.ndarray:
    """L(x) = sinc(x) * sinc(x / a)，|x| < a；np.sinc 为归一化 sinc"""
    x = np.asarray(x, dtype=np.float64)
    return np.where(np.abs(x) < a, np.sinc(x) * np.sinc(x / a), 0.0)


# ========== 权重矩阵 ==========


def kernel_matrix(
    in_len: int,
    out_len: int,
    kernel: Callable[[np.ndarray], np.ndarray],
    support: int,
    normalize: bool = False,
) -> np.ndarray:
    """
    一维重采样矩阵 (out_len, in_len)

    :param support: 核半宽，抽头为 floor(src) - support + 1 ... floor(src) + support
    """
    centers = source_coords(in_len, out_len)
    base = np.floor(centers).astype(np.int64)
    taps = base[:, None] + np.arange(-support + 1, support + 1)[None, :]
    weights = kernel(centers[:, None] - taps)
    if normalize:
        weights = weights / weights.sum(axis=1, keepdims=True)

    matrix = np.zeros((out_len, in_len), dtype=np.float64)
    rows = np.broadcast_to(np.arange(out_len)[:, None], taps.shape)
    np.add.at(matrix, (rows, np.clip(taps, 0, in_len - 1)), weights)
    return matrix


def nearest_indices(in_len: int, out_len: int) -> np.ndarray:
    return np.minimum(np.floor((np.arange(out_len) + 0.5) * (in_len / out_len)).astype(np.int64), in_len - 1)


def _separable(plane: np.ndarray, out_res: tuple[int, int], build) -> np.ndarray:
    array, is_tensor = _as_plane(plane)
    width, height = _check_target(out_res)
    rows = build(array.shape[0], height)
    cols = build(array.shape[1], width)
    out = (rows @ array.astype(np.float64) @ cols.T).astype(np.float32)
    return out[None, None] if is_tensor else out


def interp_nearest(plane: np.ndarray, out_res: tuple[int, int]) -> np.ndarray:
    array, is_tensor = _as_plane(plane)
    width, height = _check_target(out_res)
    out = array[np.ix_(nearest_indices(array.shape[0], height), nearest_indices(array.shape[1], width))]
    out = np.ascontiguousarray(out, dtype=np.float32)
    return out[None, None] if is_tensor else out


def interp_bilinear(plane: np.ndarray, out_res: tuple[int, int]) -> np.ndarray:
    return _separable(plane, out_res, lambda n, m: kernel_matrix(n, m, linear_kernel, 1))


def interp_bicubic(plane: np.ndarray, out_res: tuple[int, int], a: float | None = None) -> np.ndarray:
    from arsr.settings import arsr_settings

    a = arsr_settings.BICUBIC_A if a is None else a
    return _separable(plane, out_res, lambda n, m: kernel_matrix(n, m, lambda x: cubic_kernel(x, a), 2))


def lanczos_resample(plane: np.ndarray, out_res: tuple[int, int], window: int | None = None) -> np.ndarray:
    from arsr.settings import arsr_settings

    window = arsr_settings.LANCZOS_WINDOW if window is None else window
    return _separable(
        plane,
        out_res,
        lambda n, m: kernel_matrix(n, m, lambda x: lanczos_kernel(x, window), window, normalize=True),
    )


_RESAMPLERS = {
    "nearest": interp_nearest,
    "bilinear": interp_bilinear,
    "bicubic": interp_bicubic,
    "lanczos": lanczos_resample,
}


def resample(plane: np.ndarray, out_res: tuple[int, int], method: str) -> np.ndarray:
    """按方法名分发"""
    try:
        resampler = _RESAMPLERS[method]
    except KeyError:
        raise ParameterInvalidError("method", reason=f"must be one of: {', '.join(METHODS)}") from None
    return resampler(plane, out_res)
