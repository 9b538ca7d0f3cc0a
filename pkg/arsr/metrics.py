"""
图像质量指标：PSNR、SSIM

数据取值 [0, 1]，内部以 float64 计算。传入 Frame 时只比较 Y 平面。
"""

import math

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from arsr.exceptions import ContractError, ShapeError
from arsr.pipeline.frame import Frame

MAX_VALUE = 1.0
SSIM_WINDOW = 8
SSIM_C1 = (0.01 * MAX_VALUE) ** 2
SSIM_C2 = (0.03 * MAX_VALUE) ** 2

METRICS = ("psnr", "ssim")


def _pair(a, b, operation: str) -> tuple[np.ndarray, np.ndarray]:
    a = a.y if isinstance(a, Frame) else a
    b = b.y if isinstance(b, Frame) else b
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ShapeError(operation, expected=a.shape, actual=b.shape)
    return a, b


def psnr(a: Frame | np.ndarray, b: Frame | np.ndarray) -> float:
    """
    10 * log10(MAX^2 / MSE)，完全相同时返回 math.inf

    :raises ShapeError: 尺寸不一致
    """
    a, b = _pair(a, b, "psnr")
    mse = float(np.mean((a - b) ** 2))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(MAX_VALUE**2 / mse)


def ssim(a: Frame | np.ndarray, b: Frame | np.ndarray) -> float:
    """
    8×8 滑窗（步长 1）局部 SSIM 的均值，方差与协方差取总体形式（除以 64）

    :raises ShapeError: 尺寸不一致
    :raises ContractError: 平面小于 8×8
    """
    a, b = _pair(a, b, "ssim")
    if a.ndim != 2:
        raise ShapeError("ssim", expected="(h, w)", actual=a.shape)
    if min(a.shape) < SSIM_WINDOW:
        raise ContractError(f"ssim needs planes of at least {SSIM_WINDOW}x{SSIM_WINDOW}, got {a.shape}")

    wa = sliding_window_view(a, (SSIM_WINDOW, SSIM_WINDOW))
    wb = sliding_window_view(b, (SSIM_WINDOW, SSIM_WINDOW))
    mu_a = wa.mean(axis=(-2, -1))
    mu_b = wb.mean(axis=(-2, -1))
    da = wa - mu_a[..., None, None]
    db = wb - mu_b[..., None, None]
    var_a = (da * da).mean(axis=(-2, -1))
    var_b = (db * db).mean(axis=(-2, -1))
    cov = (da * db).mean(axis=(-2, -1))

    numerator = (2 * mu_a * mu_b + SSIM_C1) * (2 * cov + SSIM_C2)
    denominator = (mu_a * mu_a + mu_b * mu_b + SSIM_C1) * (var_a + var_b + SSIM_C2)
    return float(np.clip(np.mean(numerator / denominator), -1.0, 1.0))


def evaluate(a, b, metric: str) -> float:
    if metric == "psnr":
        return psnr(a, b)
    if metric == "ssim":
        return ssim(a, b)
    raise ContractError(f"metric must be one of {METRICS}, got {metric!r}")
