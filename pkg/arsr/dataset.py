"""
训练集生成：外部编码器命令行

对每个源视频生成三条命令：
1. 按除数缩小并以低码率压缩（默认 H.265、50 kbps）
2. 从压缩结果中抽取 LR 帧
3. 从源视频中抽取 HR 帧

生成阶段是纯函数，不访问文件系统；只有显式执行时才创建目录并调用编码器。
"""

import logging
import shutil
import subprocess
from dataclasses import dataclass, field
from pathlib import Path, PurePath

from arsr.exceptions import ArsrException, EncoderNotFoundError, StandardErrorCodes, ValueOutOfRangeError

logger = logging.getLogger(__name__)

FRAME_PATTERN = "%05d.png"
DEFAULT_VMAF_MODEL = "vmaf_4k_v0.6.1neg"


@dataclass(frozen=True)
class DatasetPlan:
    """
    commands: 依次执行的 argv 列表
    lr_video / lr_dir / hr_dir: 生成物路径（执行前不存在）
    """

    source: str
    lr_video: str
    lr_dir: str
    hr_dir: str
    commands: list[list[str]] = field(default_factory=list)

    def command_lines(self) -> list[str]:
        return [subprocess.list2cmdline(argv) for argv in self.commands]


def scale_filter(scale_divisor: int, source_res: tuple[int, int] | None = None) -> str:
    """已知源分辨率时给出具体尺寸，否则使用 ffmpeg 表达式"""
    if source_res is None:
        return f"scale=iw/{scale_divisor}:ih/{scale_divisor}:flags=bicubic"
    width, height = source_res
    return f"scale={width // scale_divisor}:{height // scale_divisor}:flags=bicubic"


def rate_arguments(bitrate: int, vbr: bool = False) -> list[str]:
    """码率参数：默认限制峰值码率，vbr 时只给目标码率"""
    rate = f"{bitrate}k"
    if vbr:
        return ["-b:v", rate]
    return ["-b:v", rate, "-maxrate", rate, "-bufsize", f"{2 * bitrate}k"]


def dataset_prep(
    src_video: str,
    bitrate: int | None = None,
    scale_divisor: int = 4,
    codec: str | None = None,
    source_res: tuple[int, int] | None = None,
    out_dir: str | None = None,
    vbr: bool = False,
) -> DatasetPlan:
    """
    :param bitrate: kbps，默认取 DATASET_BITRATE_KBPS
    :param source_res: 源分辨率 (width, height)，给出时缩放参数写成具体尺寸
    :param out_dir: 输出根目录，默认与源视频同目录、以源文件名为前缀
    :raises ValueOutOfRangeError: 码率或除数不是正数
    """
    from arsr.settings import arsr_settings

    bitrate = arsr_settings.DATASET_BITRATE_KBPS if bitrate is None else bitrate
    codec = codec or arsr_settings.DATASET_CODEC
    if bitrate < 1:
        raise ValueOutOfRangeError("bitrate", min_value=1, actual_value=bitrate)
    if scale_divisor < 1:
        raise ValueOutOfRangeError("scale_divisor", min_value=1, actual_value=scale_divisor)

    binary = arsr_settings.encoder_binary()
    source = PurePath(src_video)
    root = PurePath(out_dir) if out_dir else source.parent
    stem = f"{source.stem}_x{scale_divisor}_{bitrate}k"
    lr_video = root / f"{stem}.mp4"
    lr_dir = root / f"{stem}_lr"
    hr_dir = root / f"{source.stem}_hr"

    commands = [
        [
            binary, "-y", "-i", str(source),
            "-vf", scale_filter(scale_divisor, source_res),
            "-c:v", codec, *rate_arguments(bitrate, vbr),
            "-an", str(lr_video),
        ],
        [binary, "-y", "-i", str(lr_video), str(lr_dir / FRAME_PATTERN)],
        [binary, "-y", "-i", str(source), str(hr_dir / FRAME_PATTERN)],
    ]  # fmt: skip
    return DatasetPlan(str(source), str(lr_video), str(lr_dir), str(hr_dir), commands)


def vmaf_command(reference: str, distorted: str, model: str = DEFAULT_VMAF_MODEL) -> list[str]:
    """外部 VMAF 评测的调用方式（ffmpeg libvmaf），仅用于打印，本工具不执行"""
    from arsr.settings import arsr_settings

    return [
        arsr_settings.encoder_binary(),
        "-i", distorted,
        "-i", reference,
        "-lavfi", f"libvmaf=model=version={model}",
        "-f", "null", "-",
    ]  # fmt: skip


def execute(plan: DatasetPlan, runner=subprocess.run) -> None:
    """
    创建输出目录并依次执行命令

    :raises EncoderNotFoundError: 编码器不在 PATH 中
    :raises ArsrException: 编码器返回非零退出码（环境错误）
    """
    from arsr.settings import arsr_settings

    binary = plan.commands[0][0]
    if shutil.which(binary) is None:
        raise EncoderNotFoundError(binary, arsr_settings.ENCODER_ENV_VAR)

    for directory in (Path(plan.lr_video).parent, Path(plan.lr_dir), Path(plan.hr_dir)):
        directory.mkdir(parents=True, exist_ok=True)
    for argv in plan.commands:
        logger.info("running: %s", subprocess.list2cmdline(argv))
        try:
            runner(argv, check=True)
        except (OSError, subprocess.CalledProcessError) as exc:
            raise ArsrException(
                message=f"Encoder command failed: {subprocess.list2cmdline(argv)}",
                error_code=StandardErrorCodes.ENVIRONMENT_ERROR,
                cause=exc,
            ) from exc
