"""
tests 目录的 pytest conftest
在导入 arsr 之前配置 Django
"""

import os

# 清除环境变量，避免宿主配置干扰
os.environ.pop("DJANGO_SETTINGS_MODULE", None)
os.environ.pop("ARSR_ENCODER", None)

# 在任何其他导入之前配置 Django
import django
from django.conf import settings

if not settings.configured:
    settings.configure(
        DEBUG=True,
        USE_I18N=False,
        USE_TZ=True,
        INSTALLED_APPS=["rest_framework"],
        DATABASES={},
        ARSR={},
    )
    django.setup()

import numpy as np
import pytest
from PIL import Image

from arsr.core.model import ModelConfig


@pytest.fixture
def rng():
    """固定种子的随机数生成器"""
    return np.random.default_rng(1234)


@pytest.fixture
def tiny_cfg():
    """梯度检查与训练测试使用的小网络：N=1, M=1, 4 通道, p=8, ×2"""
    return ModelConfig(
        n_feat=1,
        n_map=1,
        base_channels=4,
        expansion=8,
        feat_kernels=(5,),
        map_kernel=3,
        groups=1,
        scale=2,
        final_kernel=3,
    )


@pytest.fixture
def small_cfg():
    """流水线与命令行测试使用的推理网络"""

    def build(scale: int = 2, groups: int = 1) -> ModelConfig:
        return ModelConfig(
            n_feat=2,
            n_map=2,
            base_channels=8,
            expansion=16,
            feat_kernels=(5, 3),
            map_kernel=3,
            groups=groups,
            scale=scale,
            final_kernel=3,
        )

    return build


@pytest.fixture
def png_file(tmp_path, rng):
    """写一张随机 RGB PNG，返回路径"""

    def write(width: int = 16, height: int = 16, name: str = "in.png", mode: str = "RGB"):
        shape = (height, width, 3) if mode == "RGB" else (height, width)
        pixels = rng.integers(0, 256, size=shape, dtype=np.uint8)
        path = tmp_path / name
        Image.fromarray(pixels).save(path)
        return path

    return write


@pytest.fixture
def weight_file(tmp_path, small_cfg):
    """写一个推理形态权重文件：seed 为 None 时全零（最近邻放大），否则由扩展权重折叠得到"""
    from arsr.core.model import collapse, expand, zeros
    from arsr.formats.weights import write_weights

    def write(scale: int = 2, seed: int | None = None, name: str | None = None, cfg=None):
        cfg = cfg or small_cfg(scale)
        weights = zeros(cfg) if seed is None else collapse(cfg, expand(cfg, seed))
        path = tmp_path / (name or f"x{cfg.scale}.arsr")
        write_weights(path, cfg, weights)
        return path

    return write


@pytest.fixture
def y4m_file(tmp_path, rng):
    """写一个随机 8 位 4:2:0 Y4M 流，返回路径"""

    def write(width: int = 6, height: int = 4, frames: int = 2, name: str = "in.y4m"):
        size = width * height + 2 * ((width + 1) // 2) * ((height + 1) // 2)
        data = f"YUV4MPEG2 W{width} H{height} F25:1 Ip A1:1 C420jpeg\n".encode()
        for _ in range(frames):
            data += b"FRAME\n" + rng.integers(0, 256, size, dtype=np.uint8).tobytes()
        path = tmp_path / name
        path.write_bytes(data)
        return path

    return write
