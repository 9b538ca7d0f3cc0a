"""
整帧放大流水线

- Y 平面：ARSR 网络（整数倍） -> 可选 Lanczos 阶段 -> 目标分辨率
- Cb/Cr 平面：从源色度一步插值到最终色度分辨率（目标亮度尺寸的一半，向上取整），
  避免两次重采样
- 输出全部截断到 [0, 1]
"""

import logging
import math
from dataclasses import dataclass

import numpy as np

from arsr.core.model import ModelConfig, WeightSet
from arsr.core.quant import QuantizedModel, model_forward
from arsr.exceptions import ContractError, ShapeError
from arsr.pipeline.planner import FramePlan, Resolution
from arsr.pipeline.resample import lanczos_resample, resample

logger = logging.getLogger(__name__)

CHROMA_METHODS = ("nearest", "bilinear", "bicubic")


def chroma_resolution(luma_res: Resolution) -> Resolution:
    """4:2:0 色度分辨率"""
    return math.ceil(luma_res[0] / 2), math.ceil(luma_res[1] / 2)


@dataclass(frozen=True, eq=False)
class Frame:
    """
    4:2:0 帧，平面为二维 float32，取值 [0, 1]（8 bit 量化码值 / 255）
    """

    y: np.ndarray
    cb: np.ndarray
    cr: np.ndarray
    bit_depth: int = 8

    def __post_init__(self):
        for name in ("y", "cb", "cr"):
            object.__setattr__(self, name, np.ascontiguousarray(getattr(self, name), dtype=np.float32))
        if self.y.ndim != 2:
            raise ShapeError("frame", expected="2-D luma plane", actual=self.y.shape)
        expected = (math.ceil(self.y.shape[0] / 2), math.ceil(self.y.shape[1] / 2))
        for name in ("cb", "cr"):
            plane = getattr(self, name)
            if plane.shape != expected:
                raise ShapeError(f"frame {name}", expected=expected, actual=plane.shape)

    @property
    def width(self) -> int:
        return self.y.shape[1]

    @property
    def height(self) -> int:
        return self.y.shape[0]

    @property
    def resolution(self) -> Resolution:
        return self.width, self.height

    @classmethod
    def gray(cls, width: int, height: int, value: float = 0.5) -> "Frame":
        cw, ch = chroma_resolution((width, height))
        return cls(
            np.full((height, width), value, np.float32),
            np.full((ch, cw), value, np.float32),
            np.full((ch, cw), value, np.float32),
        )

    def clamped(self) -> "Frame":
        return Frame(*(np.clip(p, 0.0, 1.0) for p in (self.y, self.cb, self.cr)), bit_depth=self.bit_depth)


def upscale_luma(
    y: np.ndarray,
    plan: FramePlan,
    cfg: ModelConfig | None,
    w: WeightSet | QuantizedModel | None,
) -> np.ndarray:
    """Y 平面：网络阶段 + 可选 Lanczos 阶段（未截断）"""
    if plan.uses_network:
        if cfg is None or w is None:
            raise ContractError(f"plan needs a x{plan.net_factor} network but no weights were given")
        if cfg.scale != plan.net_factor:
            raise ContractError(f"plan needs a x{plan.net_factor} network, weights are x{cfg.scale}")
        y = model_forward(cfg, w, y[None, None])[0, 0]
    if plan.uses_lanczos:
        y = lanczos_resample(y, plan.resample_target)
    return y


def upscale_frame(
    frame: Frame,
    plan: FramePlan,
    cfg: ModelConfig | None = None,
    w: WeightSet | QuantizedModel | None = None,
    chroma_method: str | None = None,
) -> Frame:
    """
    :raises ContractError: 帧尺寸与规划不符，或权重倍率与规划不符
    """
    from arsr.settings import arsr_settings

    chroma_method = chroma_method or arsr_settings.CHROMA_METHOD
    if chroma_method not in CHROMA_METHODS:
        raise ContractError(f"chroma method must be one of {CHROMA_METHODS}, got {chroma_method!r}")
    if frame.resolution != tuple(plan.input_res):
        raise ContractError(f"frame is {frame.resolution}, plan expects {plan.input_res}")

    y = upscale_luma(frame.y, plan, cfg, w)
    chroma_res = chroma_resolution(plan.output_res)
    cb = resample(frame.cb, chroma_res, chroma_method)
    cr = resample(frame.cr, chroma_res, chroma_method)
    logger.debug(
        "frame %s -> %s (net x%s, lanczos=%s, chroma=%s)",
        frame.resolution,
        plan.output_res,
        plan.net_factor,
        plan.uses_lanczos,
        chroma_method,
    )
    return Frame(y, cb, cr, frame.bit_depth).clamped()


def baseline_upscale_frame(frame: Frame, output_res: Resolution, method: str = "lanczos") -> Frame:
    """传统插值放大（对照基线）：三个平面使用同一种插值方法"""
    if output_res[0] < frame.width or output_res[1] < frame.height:
        raise ContractError(f"downscaling is not supported: {frame.resolution} -> {output_res}")
    chroma_res = chroma_resolution(output_res)
    return Frame(
        resample(frame.y, output_res, method),
        resample(frame.cb, chroma_res, method),
        resample(frame.cr, chroma_res, method),
        frame.bit_depth,
    ).clamped()
