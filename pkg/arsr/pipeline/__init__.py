"""
整帧流水线：插值重采样、倍率规划、4:2:0 帧放大
"""

from arsr.pipeline.frame import CHROMA_METHODS, Frame, baseline_upscale_frame, chroma_resolution, upscale_frame
from arsr.pipeline.planner import FramePlan, parse_resolution, plan
from arsr.pipeline.resample import (
    METHODS,
    interp_bicubic,
    interp_bilinear,
    interp_nearest,
    lanczos_kernel,
    lanczos_resample,
    resample,
)

__all__ = [
    "CHROMA_METHODS",
    "METHODS",
    "Frame",
    "FramePlan",
    "baseline_upscale_frame",
    "chroma_resolution",
    "interp_bicubic",
    "interp_bilinear",
    "interp_nearest",
    "lanczos_kernel",
    "lanczos_resample",
    "parse_resolution",
    "plan",
    "resample",
    "upscale_frame",
]
