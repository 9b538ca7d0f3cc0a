"""
ARSR 网络

数据流（Y 通道）：
    x0 = y
    t  = N 层特征提取卷积（每层后接激活）
    u  = M 层非线性映射卷积（分组，每层后接激活）
    t2 = t + u                      # 内残差，跨越全部映射层
    z  = 末层卷积(t2)，输出 r*r 通道
    z' = z + y                      # 全局残差，y 广播到每个 r*r 通道
    out = depth_to_space(z', r)

权重有两种形态：
- Expanded（训练形态）：每个逻辑层是一对卷积，f×f 扩展到 p 通道，再 1×1 收回
- Collapsed（推理形态）：每个逻辑层是一次 f×f 卷积

两卷积之间没有非线性，因此 collapse 在实数意义下与扩展形态完全等价。
全零网络的输出是输入的最近邻 ×r 放大。
"""

import enum
import logging
from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np

from arsr.core.tensor import ConvWeights, Tensor, add, conv2d, depth_to_space, relu
from arsr.exceptions import ContractError, ShapeError

logger = logging.getLogger(__name__)

SUPPORTED_SCALES = (2, 3, 4)
SUPPORTED_GROUPS = (1, 2, 4, 8)
DEFAULT_FEAT_KERNELS = {1: (5,), 2: (7, 5), 3: (7, 5, 3)}


class WeightForm(str, enum.Enum):
    EXPANDED = "expanded"
    COLLAPSED = "collapsed"


class LayerKind(str, enum.Enum):
    FEATURE = "feature"
    MAPPING = "mapping"
    FINAL = "final"


@dataclass(frozen=True)
class ModelConfig:
    """
    ARSR 拓扑的声明式描述

    取值范围的校验在 arsr.resources.serializers.ModelConfigSerializer 中声明，
    这里只保证结构上自洽（核数量、分组整除、奇数核）。
    """

    n_feat: int = 3
    n_map: int = 11
    base_channels: int = 16
    expansion: int = 256
    feat_kernels: tuple[int, ...] = (7, 5, 3)
    map_kernel: int = 3
    groups: int = 1
    scale: int = 4
    final_kernel: int = 3
    # 特征提取与映射层之后的激活函数，末层卷积之后不加激活
    activation: str = "relu"

    def __post_init__(self):
        object.__setattr__(self, "feat_kernels", tuple(int(k) for k in self.feat_kernels))
        if len(self.feat_kernels) != self.n_feat:
            raise ContractError(
                f"feat_kernels {list(self.feat_kernels)} must have n_feat={self.n_feat} entries"
            )
        for kernel in (*self.feat_kernels, self.map_kernel, self.final_kernel):
            if kernel < 1 or kernel % 2 == 0:
                raise ContractError(f"kernel size {kernel} must be a positive odd number")
        if self.groups < 1 or self.base_channels % self.groups:
            raise ContractError(f"groups={self.groups} must divide base_channels={self.base_channels}")
        if self.expansion % self.groups:
            raise ContractError(f"groups={self.groups} must divide expansion={self.expansion}")
        if self.activation not in ("relu", "identity"):
            raise ContractError(f"unknown activation {self.activation!r}")

    @classmethod
    def with_defaults(cls, n_feat: int = 3, **kwargs) -> "ModelConfig":
        """按 N 自动选择特征提取核尺寸"""
        kwargs.setdefault("feat_kernels", DEFAULT_FEAT_KERNELS[n_feat])
        return cls(n_feat=n_feat, **kwargs)

    @property
    def out_channels(self) -> int:
        """末层卷积输出通道 = r*r"""
        return self.scale * self.scale

    @property
    def n_layers(self) -> int:
        return self.n_feat + self.n_map + 1

    def layer_specs(self) -> list["ConvLayerSpec"]:
        """按网络顺序列出全部逻辑层"""
        c = self.base_channels
        specs = []
        for i, f in enumerate(self.feat_kernels):
            specs.append(ConvLayerSpec(LayerKind.FEATURE, 1 if i == 0 else c, c, f, 1))
        for _ in range(self.n_map):
            specs.append(ConvLayerSpec(LayerKind.MAPPING, c, c, self.map_kernel, self.groups))
        specs.append(ConvLayerSpec(LayerKind.FINAL, c, self.out_channels, self.final_kernel, 1))
        return specs

    def to_dict(self) -> dict:
        return {
            "n_feat": self.n_feat,
            "n_map": self.n_map,
            "base_channels": self.base_channels,
            "expansion": self.expansion,
            "feat_kernels": list(self.feat_kernels),
            "map_kernel": self.map_kernel,
            "groups": self.groups,
            "scale": self.scale,
            "final_kernel": self.final_kernel,
            "activation": self.activation,
        }


@dataclass(frozen=True)
class ConvLayerSpec:
    """一个逻辑层：in_channels -> out_channels，f×f，groups 组"""

    kind: LayerKind
    in_channels: int
    out_channels: int
    kernel: int
    groups: int

    def conv_shapes(self, form: WeightForm, expansion: int) -> list[tuple[tuple[int, int, int, int], int]]:
        """该逻辑层在给定形态下的 (kernels 形状, groups) 列表"""
        g = self.groups
        if form is WeightForm.COLLAPSED:
            return [((self.out_channels, self.in_channels // g, self.kernel, self.kernel), g)]
        return [
            ((expansion, self.in_channels // g, self.kernel, self.kernel), g),
            ((self.out_channels, expansion // g, 1, 1), g),
        ]


@dataclass(frozen=True, eq=False)
class WeightSet:
    """
    参数集合

    layers[i] 是第 i 个逻辑层的卷积序列：Expanded 为 (A, B) 两个卷积，Collapsed 为 (K,)。
    """

    form: WeightForm
    layers: tuple[tuple[ConvWeights, ...], ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "form", WeightForm(self.form))
        object.__setattr__(self, "layers", tuple(tuple(layer) for layer in self.layers))

    def convs(self) -> list[ConvWeights]:
        return [conv for layer in self.layers for conv in layer]

    @property
    def param_count(self) -> int:
        return sum(conv.param_count for conv in self.convs())

    def astype(self, dtype) -> "WeightSet":
        return WeightSet(self.form, [[conv.astype(dtype) for conv in layer] for layer in self.layers])

    def equals(self, other: "WeightSet") -> bool:
        if self.form is not other.form or len(self.layers) != len(other.layers):
            return False
        return all(
            len(a) == len(b) and all(x.equals(y) for x, y in zip(a, b))
            for a, b in zip(self.layers, other.layers)
        )


def validate_weights(cfg: ModelConfig, w: WeightSet) -> None:
    """
    校验权重形状与配置一致

    :raises ShapeError: 层数或任意卷积形状与配置不一致
    """
    specs = cfg.layer_specs()
    if len(w.layers) != len(specs):
        raise ShapeError("weights", expected=f"{len(specs)} layers", actual=f"{len(w.layers)} layers")
    for index, (spec, layer) in enumerate(zip(specs, w.layers)):
        expected = spec.conv_shapes(w.form, cfg.expansion)
        actual = [(conv.shape, conv.groups) for conv in layer]
        if [(tuple(s), g) for s, g in expected] != [(tuple(s), g) for s, g in actual]:
            raise ShapeError(f"weights layer {index} ({spec.kind.value})", expected=expected, actual=actual)


def layer_shapes(cfg: ModelConfig, form: WeightForm | str) -> list[list[tuple[tuple[int, int, int, int], int]]]:
    form = WeightForm(form)
    return [spec.conv_shapes(form, cfg.expansion) for spec in cfg.layer_specs()]


def init_bound(n: int, f: int) -> float:
    """均匀初始化边界 sqrt(1 / (n * f * f))，n 为每组输入通道数"""
    return float(np.sqrt(1.0 / (n * f * f)))


def expand(cfg: ModelConfig, seed: int) -> WeightSet:
    """
    按种子确定性地初始化扩展形态权重

    每个卷积的核服从 U(-b, b)，b = sqrt(1/(n*f*f))；偏置为零。
    随机源为 numpy 的 64 位 PCG64 生成器，由 SeedSequence 从整数种子派生。
    """
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    layers = []
    for shapes in layer_shapes(cfg, WeightForm.EXPANDED):
        layer = []
        for shape, groups in shapes:
            bound = init_bound(shape[1], shape[2])
            kernels = rng.uniform(-bound, bound, size=shape).astype(np.float32)
            layer.append(ConvWeights(kernels, np.zeros(shape[0], np.float32), groups))
        layers.append(layer)
    logger.debug("expanded weights initialized: seed=%s, params=%s", seed, param_count(cfg, WeightForm.EXPANDED))
    return WeightSet(WeightForm.EXPANDED, layers)


def zeros(cfg: ModelConfig, form: WeightForm | str = WeightForm.COLLAPSED) -> WeightSet:
    """全零权重：网络退化为最近邻 ×r 放大器"""
    form = WeightForm(form)
    layers = [
        [ConvWeights(np.zeros(shape, np.float32), np.zeros(shape[0], np.float32), groups) for shape, groups in shapes]
        for shapes in layer_shapes(cfg, form)
    ]
    return WeightSet(form, layers)


def _collapse_pair(first: ConvWeights, second: ConvWeights) -> ConvWeights:
    """
    折叠 A (n->p, f×f) 与 B (p->m, 1×1)

    组内：K[o, c] = sum_p B[o, p] * A[p, c]；c[o] = b[o] + sum_p B[o, p] * a[p]
    """
    g = first.groups
    p_per_group = first.out_channels // g
    m_per_group = second.out_channels // g
    mix = second.kernels[:, :, 0, 0].astype(np.float64)
    a_kernels = first.kernels.astype(np.float64)
    a_bias = first.bias.astype(np.float64)

    kernels, bias = [], []
    for k in range(g):
        b_k = mix[k * m_per_group : (k + 1) * m_per_group]
        a_slice = slice(k * p_per_group, (k + 1) * p_per_group)
        kernels.append(np.einsum("op,pcij->ocij", b_k, a_kernels[a_slice]))
        bias.append(b_k @ a_bias[a_slice])
    kernels = np.concatenate(kernels, axis=0)
    bias = second.bias.astype(np.float64) + np.concatenate(bias)
    dtype = np.result_type(first.kernels.dtype, second.kernels.dtype)
    return ConvWeights(kernels.astype(dtype), bias.astype(dtype), g)


def collapse(cfg: ModelConfig, w: WeightSet) -> WeightSet:
    """
    扩展形态 -> 推理形态

    :raises ContractError: 输入不是扩展形态
    """
    if w.form is not WeightForm.EXPANDED:
        raise ContractError(f"collapse expects expanded weights, got {w.form.value}")
    validate_weights(cfg, w)
    layers = [[_collapse_pair(first, second)] for first, second in w.layers]
    collapsed = WeightSet(WeightForm.COLLAPSED, layers)
    logger.info(
        "collapsed %s layers: %s -> %s params",
        len(layers),
        w.param_count,
        collapsed.param_count,
    )
    return collapsed


def param_count(cfg: ModelConfig, form: WeightForm | str) -> int:
    """按形状精确统计参数量（核 + 偏置），分组层按 1/g 计核参数"""
    total = 0
    for shapes in layer_shapes(cfg, form):
        for shape, _groups in shapes:
            total += int(np.prod(shape)) + shape[0]
    return total


def activate(cfg: ModelConfig, x: Tensor) -> Tensor:
    return relu(x) if cfg.activation == "relu" else x


def apply_layer(layer: Sequence[ConvWeights], x: Tensor) -> Tensor:
    for conv in layer:
        x = conv2d(x, conv)
    return x


def check_input_plane(y_plane: Tensor) -> Tensor:
    if y_plane.ndim != 4:
        raise ShapeError("forward", expected="(batch, 1, height, width)", actual=y_plane.shape)
    if y_plane.shape[1] != 1:
        raise ContractError(f"forward expects a single luma channel, got {y_plane.shape[1]} channels")
    return y_plane


def forward(cfg: ModelConfig, w: WeightSet, y_plane: Tensor) -> Tensor:
    """
    前向推理（两种形态通用），输出未截断到 [0, 1]

    :param y_plane: (batch, 1, h, w) 的 Y 平面
    :return: (batch, 1, h*r, w*r)
    """
    check_input_plane(y_plane)
    validate_weights(cfg, w)

    t = y_plane
    layers = iter(w.layers)
    for _ in range(cfg.n_feat):
        t = activate(cfg, apply_layer(next(layers), t))

    u = t
    for _ in range(cfg.n_map):
        u = activate(cfg, apply_layer(next(layers), u))

    z = apply_layer(next(layers), add(t, u))
    z = z + y_plane.astype(z.dtype, copy=False)
    return depth_to_space(z, cfg.scale)


def nearest_upscale(y_plane: Tensor, r: int) -> Tensor:
    """最近邻 ×r（全零网络的参照输出）"""
    return np.repeat(np.repeat(y_plane, r, axis=2), r, axis=3)
