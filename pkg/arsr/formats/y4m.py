"""
Y4M（YUV4MPEG2）读写，仅支持 8 bit 4:2:0

头部参数与每帧的 FRAME 参数原样保留，读 -> 写字节一致。
帧数据为 Y、Cb、Cr 三个平面顺序排列，色度尺寸为 ceil(w/2) × ceil(h/2)。
"""

import logging
import os
from dataclasses import dataclass, field

import numpy as np

from arsr.exceptions import FileAccessError, FormatError
from arsr.formats.image import from_codes, to_codes
from arsr.pipeline.frame import Frame, chroma_resolution

logger = logging.getLogger(__name__)

SIGNATURE = b"YUV4MPEG2"
FRAME_TAG = b"FRAME"
SUPPORTED_COLORSPACES = ("420", "420jpeg", "420paldv", "420mpeg2")


@dataclass
class Y4MHeader:
    """
    params 保存 W/H 以外的全部头部参数（含前缀字母），按出现顺序
    """

    width: int
    height: int
    params: list[str] = field(default_factory=lambda: ["F25:1", "Ip", "A1:1", "C420jpeg"])

    @property
    def frame_rate(self) -> str | None:
        return self._param("F")

    @property
    def colorspace(self) -> str:
        return self._param("C") or "420"

    def _param(self, key: str) -> str | None:
        for token in self.params:
            if token.startswith(key):
                return token[1:]
        return None

    @property
    def frame_size(self) -> int:
        cw, ch = chroma_resolution((self.width, self.height))
        return self.width * self.height + 2 * cw * ch

    @classmethod
    def parse(cls, line: bytes, path: str | os.PathLike | None = None) -> "Y4MHeader":
        tokens = line.decode("ascii", errors="replace").split(" ")
        if tokens[0].encode() != SIGNATURE:
            raise FormatError(path, reason="missing YUV4MPEG2 signature")
        width = height = None
        params = []
        for token in tokens[1:]:
            if not token:
                raise FormatError(path, reason="empty header parameter")
            if token[0] == "W":
                width = _parse_int(token[1:], "width", path)
            elif token[0] == "H":
                height = _parse_int(token[1:], "height", path)
            else:
                params.append(token)
        if width is None or height is None:
            raise FormatError(path, reason="header lacks width or height")
        header = cls(width, height, params)
        if header.colorspace not in SUPPORTED_COLORSPACES:
            raise FormatError(path, reason=f"unsupported colorspace {header.colorspace!r}, only 8-bit 4:2:0")
        return header

    def serialize(self) -> bytes:
        tokens = [SIGNATURE.decode(), f"W{self.width}", f"H{self.height}", *self.params]
        return " ".join(tokens).encode("ascii") + b"\n"


def _parse_int(text: str, name: str, path) -> int:
    try:
        value = int(text)
    except ValueError:
        raise FormatError(path, reason=f"invalid {name} {text!r}") from None
    if value < 1:
        raise FormatError(path, reason=f"{name} must be positive, got {value}")
    return value


@dataclass
class RawVideo:
    """
    frame_params[i] 是第 i 帧 FRAME 标记后的参数原文（通常为空）
    """

    header: Y4MHeader
    frames: list[Frame] = field(default_factory=list)
    frame_params: list[bytes] = field(default_factory=list)

    def __post_init__(self):
        if not self.frame_params:
            self.frame_params = [b""] * len(self.frames)

    @property
    def resolution(self) -> tuple[int, int]:
        return self.header.width, self.header.height


def decode_frame(payload: bytes, width: int, height: int) -> Frame:
    cw, ch = chroma_resolution((width, height))
    codes = np.frombuffer(payload, dtype=np.uint8)
    y_end = width * height
    cb_end = y_end + cw * ch
    return Frame(
        from_codes(codes[:y_end].reshape(height, width)),
        from_codes(codes[y_end:cb_end].reshape(ch, cw)),
        from_codes(codes[cb_end:].reshape(ch, cw)),
    )


def encode_frame(frame: Frame) -> bytes:
    return b"".join(to_codes(plane).tobytes() for plane in (frame.y, frame.cb, frame.cr))


def parse_y4m(data: bytes, path: str | os.PathLike | None = None) -> RawVideo:
    """
    :raises FormatError: 头部非法、帧标记缺失或帧数据被截断
    """
    line_end = data.find(b"\n")
    if line_end < 0:
        raise FormatError(path, reason="header line is not terminated")
    header = Y4MHeader.parse(data[:line_end], path)

    frames, frame_params = [], []
    offset = line_end + 1
    while offset < len(data):
        tag_end = data.find(b"\n", offset)
        if tag_end < 0 or not data.startswith(FRAME_TAG, offset):
            raise FormatError(path, reason=f"expected FRAME marker at byte {offset}")
        params = data[offset + len(FRAME_TAG) : tag_end]
        start = tag_end + 1
        end = start + header.frame_size
        if end > len(data):
            raise FormatError(path, reason=f"frame {len(frames)} is truncated")
        frames.append(decode_frame(data[start:end], header.width, header.height))
        frame_params.append(params)
        offset = end

    return RawVideo(header, frames, frame_params)


def serialize_y4m(video: RawVideo) -> bytes:
    chunks = [video.header.serialize()]
    for frame, params in zip(video.frames, video.frame_params):
        if frame.resolution != video.resolution:
            raise FormatError(reason=f"frame is {frame.resolution}, stream is {video.resolution}")
        chunks.append(FRAME_TAG + params + b"\n")
        chunks.append(encode_frame(frame))
    return b"".join(chunks)


def read_y4m(path: str | os.PathLike) -> RawVideo:
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except OSError as exc:
        raise FileAccessError(path, "read", cause=exc) from exc
    video = parse_y4m(data, path)
    logger.debug("read %s: %s frames at %sx%s", path, len(video.frames), *video.resolution)
    return video


def write_y4m(path: str | os.PathLike, video: RawVideo) -> None:
    data = serialize_y4m(video)
    try:
        with open(path, "wb") as fh:
            fh.write(data)
    except OSError as exc:
        raise FileAccessError(path, "write", cause=exc) from exc
    logger.debug("wrote %s: %s frames at %sx%s", path, len(video.frames), *video.resolution)
