"""
PNG <-> Frame

RGB 与 YCbCr 之间使用全范围（full-range）矩阵，默认 BT.709，可选 BT.601。
色度下采样为 2×2 均值（奇数边复制边缘），上采样为复制（每个色度样本覆盖 2×2 亮度块）。
灰度图直接映射到 Y，色度置 0.5，往返无损。
"""

import logging
import os
from dataclasses import dataclass

import numpy as np
from PIL import Image, UnidentifiedImageError

from arsr.exceptions import FileAccessError, FormatError, ParameterInvalidError
from arsr.pipeline.frame import Frame, chroma_resolution

logger = logging.getLogger(__name__)

# (Kr, Kb)
COLOR_MATRICES = {
    "bt709": (0.2126, 0.0722),
    "bt601": (0.299, 0.114),
}


def _coefficients(matrix: str | None) -> tuple[float, float]:
    from arsr.settings import arsr_settings

    matrix = matrix or arsr_settings.COLOR_MATRIX
    try:
        return COLOR_MATRICES[matrix]
    except KeyError:
        raise ParameterInvalidError("matrix", reason=f"must be one of: {', '.join(COLOR_MATRICES)}") from None


def rgb_to_ycbcr(rgb: np.ndarray, matrix: str | None = None) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(h, w, 3) 取值 [0, 1] 的 RGB -> 全分辨率 Y, Cb, Cr（色度以 0.5 为中心）"""
    kr, kb = _coefficients(matrix)
    kg = 1.0 - kr - kb
    rgb = np.asarray(rgb, dtype=np.float64)
    r, g, b = rgb[..., 0], rgb[..., 1], rgb[..., 2]
    y = kr * r + kg * g + kb * b
    cb = (b - y) / (2.0 * (1.0 - kb)) + 0.5
    cr = (r - y) / (2.0 * (1.0 - kr)) + 0.5
    return y, cb, cr


def ycbcr_to_rgb(y: np.ndarray, cb: np.ndarray, cr: np.ndarray, matrix: str | None = None) -> np.ndarray:
    kr, kb = _coefficients(matrix)
    kg = 1.0 - kr - kb
    y = np.asarray(y, dtype=np.float64)
    pb = np.asarray(cb, dtype=np.float64) - 0.5
    pr = np.asarray(cr, dtype=np.float64) - 0.5
    r = y + 2.0 * (1.0 - kr) * pr
    b = y + 2.0 * (1.0 - kb) * pb
    g = (y - kr * r - kb * b) / kg
    return np.stack([r, g, b], axis=-1)


def subsample_chroma(plane: np.ndarray) -> np.ndarray:
    """2×2 均值下采样到 ceil(h/2) × ceil(w/2)"""
    h, w = plane.shape
    padded = np.pad(plane, ((0, h % 2), (0, w % 2)), mode="edge")
    return padded.reshape(padded.shape[0] // 2, 2, padded.shape[1] // 2, 2).mean(axis=(1, 3))


def upsample_chroma(plane: np.ndarray, shape: tuple[int, int]) -> np.ndarray:
    return np.repeat(np.repeat(plane, 2, axis=0), 2, axis=1)[: shape[0], : shape[1]]


def to_codes(plane: np.ndarray) -> np.ndarray:
    """[0, 1] 浮点 -> 8 bit 码值"""
    return np.clip(np.rint(np.asarray(plane, dtype=np.float64) * 255.0), 0, 255).astype(np.uint8)


def from_codes(codes: np.ndarray) -> np.ndarray:
    return np.asarray(codes, dtype=np.float32) / np.float32(255.0)


def frame_from_rgb(rgb: np.ndarray, matrix: str | None = None) -> Frame:
    """(h, w, 3) uint8 RGB -> 4:2:0 Frame"""
    y, cb, cr = rgb_to_ycbcr(np.asarray(rgb, dtype=np.float64) / 255.0, matrix)
    return Frame(y, subsample_chroma(cb), subsample_chroma(cr))


def frame_to_rgb(frame: Frame, matrix: str | None = None) -> np.ndarray:
    shape = frame.y.shape
    rgb = ycbcr_to_rgb(
        frame.y,
        upsample_chroma(frame.cb, shape),
        upsample_chroma(frame.cr, shape),
        matrix,
    )
    return to_codes(rgb)


def frame_from_gray(codes: np.ndarray) -> Frame:
    y = from_codes(codes)
    cw, ch = chroma_resolution((y.shape[1], y.shape[0]))
    neutral = np.full((ch, cw), 0.5, np.float32)
    return Frame(y, neutral, neutral.copy())


@dataclass(frozen=True, eq=False)
class ImageFile:
    """
    mode: "L"（灰度）或 "RGB"
    matrix: RGB 与 YCbCr 互转使用的矩阵
    """

    frame: Frame
    mode: str = "RGB"
    matrix: str = "bt709"


def read_image(path: str | os.PathLike, matrix: str | None = None) -> ImageFile:
    """
    :raises FileAccessError: 文件不存在或不可读
    :raises FormatError: 不是可识别的图像
    """
    from arsr.settings import arsr_settings

    matrix = matrix or arsr_settings.COLOR_MATRIX
    _coefficients(matrix)
    try:
        with Image.open(path) as image:
            image.load()
            mode = "L" if image.mode in ("L", "1", "LA", "I;16", "I") else "RGB"
            pixels = np.asarray(image.convert(mode))
    except UnidentifiedImageError as exc:
        raise FormatError(path, reason="not a readable image", cause=exc) from exc
    except OSError as exc:
        raise FileAccessError(path, "read", cause=exc) from exc

    frame = frame_from_gray(pixels) if mode == "L" else frame_from_rgb(pixels, matrix)
    logger.debug("read %s: %sx%s %s", path, frame.width, frame.height, mode)
    return ImageFile(frame, mode, matrix)


def write_image(path: str | os.PathLike, frame: Frame, mode: str = "RGB", matrix: str | None = None) -> None:
    """8 bit PNG 输出"""
    if mode == "L":
        image = Image.fromarray(to_codes(frame.y))
    else:
        image = Image.fromarray(frame_to_rgb(frame, matrix))
    try:
        image.save(path, format="PNG")
    except OSError as exc:
        raise FileAccessError(path, "write", cause=exc) from exc
    logger.debug("wrote %s: %sx%s %s", path, frame.width, frame.height, mode)
