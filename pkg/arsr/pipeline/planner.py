"""
放大倍率规划

先用不超过目标分辨率的最大整数倍（4/3/2）经过网络放大，
若网络输出与目标不一致，再用 Lanczos 重采样到目标分辨率；
任何整数倍都超出目标时跳过网络（倍率 1），只做 Lanczos。
"""

from dataclasses import dataclass

from arsr.exceptions import ContractError

NET_FACTORS = (4, 3, 2, 1)

Resolution = tuple[int, int]


@dataclass(frozen=True)
class FramePlan:
    """
    net_factor: 网络阶段的整数倍率，1 表示跳过网络
    resample_target: Lanczos 阶段的目标 (width, height)，不需要时为 None
    """

    input_res: Resolution
    output_res: Resolution
    net_factor: int
    resample_target: Resolution | None = None

    @property
    def net_res(self) -> Resolution:
        return self.input_res[0] * self.net_factor, self.input_res[1] * self.net_factor

    @property
    def uses_network(self) -> bool:
        return self.net_factor > 1

    @property
    def uses_lanczos(self) -> bool:
        return self.resample_target is not None

    @property
    def output_channels(self) -> int | None:
        """末层卷积输出通道数（跳过网络时为 None）"""
        return self.net_factor**2 if self.uses_network else None


def parse_resolution(text: str) -> Resolution:
    """'3840x2160' -> (3840, 2160)"""
    try:
        width, height = (int(part) for part in text.lower().split("x"))
    except ValueError:
        raise ContractError(f"resolution must look like WIDTHxHEIGHT, got {text!r}") from None
    if width < 1 or height < 1:
        raise ContractError(f"resolution must be positive, got {text!r}")
    return width, height


def plan(input_res: Resolution, output_res: Resolution, factors: tuple[int, ...] = NET_FACTORS) -> FramePlan:
    """
    :param factors: 可用的网络倍率（例如只有 ×2 权重时传 (2, 1)）
    :raises ContractError: 任一维度缩小
    """
    (in_w, in_h), (out_w, out_h) = input_res, output_res
    if out_w < in_w or out_h < in_h:
        raise ContractError(f"downscaling is not supported: {in_w}x{in_h} -> {out_w}x{out_h}")

    net_factor = max(k for k in (*factors, 1) if in_w * k <= out_w and in_h * k <= out_h)
    net_res = (in_w * net_factor, in_h * net_factor)
    resample_target = None if net_res == (out_w, out_h) else (out_w, out_h)
    return FramePlan((in_w, in_h), (out_w, out_h), net_factor, resample_target)
