import os

from django.conf import settings
from rest_framework.settings import APISettings

# 核心配置
DEFAULT = {
    # 色度与重采样
    "CHROMA_METHOD": "bilinear",  # nearest / bilinear / bicubic
    "COLOR_MATRIX": "bt709",  # PNG <-> YCbCr 转换矩阵，bt709 / bt601
    "LANCZOS_WINDOW": 3,  # Lanczos 窗口 a
    "BICUBIC_A": -0.5,  # 三次卷积核系数（Catmull-Rom）
    # 量化
    "QUANT_BITS": 12,
    "QUANT_POW2": False,
    # 数据集生成
    "DATASET_BITRATE_KBPS": 50,
    "DATASET_CODEC": "libx265",
    "ENCODER_BINARY": "ffmpeg",
    "ENCODER_ENV_VAR": "ARSR_ENCODER",  # 设置该环境变量时覆盖 ENCODER_BINARY
    # 并发
    "WORKER_THREADS": 4,
    # 训练
    "OPTIMIZER_CLASS": "arsr.core.train.MomentumSGD",
    "DEFAULT_MODEL": {
        "n_feat": 3,
        "n_map": 11,
        "base_channels": 16,
        "expansion": 256,
        "feat_kernels": [7, 5, 3],
        "map_kernel": 3,
        "groups": 1,
        "scale": 4,
        "final_kernel": 3,
        "activation": "relu",
    },
    "DEFAULT_TRAIN": {
        "lr": 0.02,
        "momentum": 0.9,
        "epochs": 100,
        "batch": 4,
        "patch": 16,
        "seed": 0,
        "init": "uniform",
    },
}

# 需要按导入路径加载的配置项
IMPORT_STRINGS = [
    "OPTIMIZER_CLASS",
]


class ArsrSettings(APISettings):
    """
    ARSR Settings
    从 Django settings 的 ARSR 字典读取用户配置，未提供的键使用 DEFAULT。
    """

    @property
    def user_settings(self):
        if not hasattr(self, "_user_settings"):
            self._user_settings = getattr(settings, "ARSR", {})
        return self._user_settings

    def encoder_binary(self) -> str:
        """外部编码器路径：环境变量优先"""
        return os.environ.get(self.ENCODER_ENV_VAR) or self.ENCODER_BINARY


arsr_settings = ArsrSettings(None, DEFAULT, IMPORT_STRINGS)
