"""
文件格式：PNG、Y4M、权重清单 + 数据块、损失历史 CSV
"""

from arsr.formats.history import read_history, write_history
from arsr.formats.image import ImageFile, read_image, rgb_to_ycbcr, write_image, ycbcr_to_rgb
from arsr.formats.weights import WeightFile, read_weights, write_weights
from arsr.formats.y4m import RawVideo, Y4MHeader, read_y4m, write_y4m

__all__ = [
    "ImageFile",
    "RawVideo",
    "WeightFile",
    "Y4MHeader",
    "read_history",
    "read_image",
    "read_weights",
    "read_y4m",
    "rgb_to_ycbcr",
    "write_history",
    "write_image",
    "write_weights",
    "write_y4m",
    "ycbcr_to_rgb",
]
