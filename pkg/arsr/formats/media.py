"""
按扩展名读写帧序列：.y4m 为视频流，其余按 PNG 处理
"""

import os
from dataclasses import dataclass
from pathlib import Path

from arsr.exceptions import ContractError
from arsr.formats.image import ImageFile, read_image, write_image
from arsr.formats.y4m import RawVideo, Y4MHeader, read_y4m, write_y4m
from arsr.pipeline.frame import Frame

Y4M_SUFFIX = ".y4m"


def is_y4m(path: str | os.PathLike) -> bool:
    return Path(path).suffix.lower() == Y4M_SUFFIX


@dataclass
class MediaFile:
    frames: list[Frame]
    image: ImageFile | None = None
    video: RawVideo | None = None

    @property
    def resolution(self) -> tuple[int, int]:
        return self.frames[0].resolution

    @property
    def mode(self) -> str:
        return self.image.mode if self.image else "RGB"


def read_media(path: str | os.PathLike, matrix: str | None = None) -> MediaFile:
    if is_y4m(path):
        video = read_y4m(path)
        if not video.frames:
            raise ContractError(f"'{path}' contains no frames")
        return MediaFile(list(video.frames), video=video)
    image = read_image(path, matrix)
    return MediaFile([image.frame], image=image)


def write_media(
    path: str | os.PathLike,
    frames: list[Frame],
    like: MediaFile | None = None,
    matrix: str | None = None,
) -> None:
    """
    输出格式由扩展名决定；Y4M 输出沿用输入流的头部参数与帧参数

    :raises ContractError: 多帧写入 PNG
    """
    if is_y4m(path):
        width, height = frames[0].resolution
        if like is not None and like.video is not None:
            header = Y4MHeader(width, height, list(like.video.header.params))
            frame_params = list(like.video.frame_params)
        else:
            header = Y4MHeader(width, height)
            frame_params = []
        write_y4m(path, RawVideo(header, list(frames), frame_params))
        return

    if len(frames) != 1:
        raise ContractError(f"PNG output holds a single frame, got {len(frames)}; use a .y4m output")
    write_image(path, frames[0], like.mode if like else "RGB", matrix)
