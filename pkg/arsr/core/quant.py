"""
模拟定点量化

对称、逐张量（per-tensor）的 fake-quant：
    q = clamp(round(x / s), -(2^(b-1)-1), 2^(b-1)-1)，输出 q * s
round 为四舍五入远离零。pow2 模式下 s 向上取整到 2 的整数次幂，不会引入额外截断。

量化推理流程（先 collapse 后量化）：
    输入 fake_quant -> 每个逻辑层 conv(量化核) -> 激活 -> fake_quant(激活)
偏置保持浮点（对应硬件中的 32 位累加器）。
"""

import logging
import math
from dataclasses import dataclass

import numpy as np

from arsr.core.model import (
    ModelConfig,
    WeightForm,
    WeightSet,
    activate,
    apply_layer,
    check_input_plane,
    forward,
    validate_weights,
)
from arsr.core.tensor import ConvWeights, Tensor, add, depth_to_space
from arsr.exceptions import ContractError, DataError, ValueOutOfRangeError

logger = logging.getLogger(__name__)

MIN_BITS = 2
MAX_BITS = 16


@dataclass(frozen=True)
class QuantParams:
    bits: int = 12
    scale: float = 1.0
    pow2: bool = False
    mode: str = "symmetric"

    def __post_init__(self):
        if not MIN_BITS <= self.bits <= MAX_BITS:
            raise ValueOutOfRangeError("bits", MIN_BITS, MAX_BITS, self.bits)
        if not (self.scale > 0 and math.isfinite(self.scale)):
            raise ContractError(f"quantization scale must be positive and finite, got {self.scale}")
        if self.pow2 and math.frexp(self.scale)[0] != 0.5:
            raise ContractError(f"pow2 quantization scale must be a power of two, got {self.scale}")

    @property
    def qmax(self) -> int:
        return 2 ** (self.bits - 1) - 1

    @property
    def exponent(self) -> int | None:
        """pow2 模式下 s = 2^exponent"""
        if not self.pow2:
            return None
        return math.frexp(self.scale)[1] - 1


def _qmax(bits: int) -> int:
    return 2 ** (bits - 1) - 1


def pow2_ceil(value: float) -> float:
    """不小于 value 的最小 2 的整数次幂"""
    mantissa, exponent = math.frexp(value)
    if mantissa == 0.5:
        return value
    return math.ldexp(1.0, exponent)


def calibrate(values, bits: int = 12, pow2: bool = False) -> QuantParams:
    """
    由数据的最大绝对值选择量化尺度

    :raises DataError: 数据为空或包含 NaN/Inf
    """
    if not MIN_BITS <= bits <= MAX_BITS:
        raise ValueOutOfRangeError("bits", MIN_BITS, MAX_BITS, bits)
    array = np.asarray(values, dtype=np.float64)
    if array.size == 0:
        raise DataError("calibration values are empty")
    if not np.all(np.isfinite(array)):
        raise DataError("calibration values contain NaN or Inf")

    amax = float(np.max(np.abs(array)))
    scale = amax / _qmax(bits) if amax > 0 else 1.0
    if pow2:
        scale = pow2_ceil(scale)
    return QuantParams(bits=bits, scale=scale, pow2=pow2)


def _round_half_away(x: np.ndarray) -> np.ndarray:
    return np.sign(x) * np.floor(np.abs(x) + 0.5)


def quantize(t, q: QuantParams) -> np.ndarray:
    """量化到整数网格（int32）"""
    x = np.asarray(t, dtype=np.float64)
    return np.clip(_round_half_away(x / q.scale), -q.qmax, q.qmax).astype(np.int32)


def fake_quant(t: Tensor, q: QuantParams) -> Tensor:
    """量化再反量化，输出保留输入的浮点类型"""
    t = np.asarray(t)
    dtype = t.dtype if np.issubdtype(t.dtype, np.floating) else np.float32
    return (quantize(t, q).astype(np.float64) * q.scale).astype(dtype)


def quant_error(t: Tensor, q: QuantParams) -> tuple[float, float]:
    """(最大绝对误差, 均方误差)"""
    diff = fake_quant(t, q).astype(np.float64) - np.asarray(t, dtype=np.float64)
    return float(np.max(np.abs(diff))), float(np.mean(diff**2))


@dataclass(frozen=True)
class LayerQuant:
    """一个逻辑层的量化参数：核尺度 + 输出激活尺度"""

    weight: QuantParams
    activation: QuantParams


@dataclass(frozen=True, eq=False)
class QuantizedModel:
    weights: WeightSet
    layers: tuple[LayerQuant, ...]
    input: QuantParams

    @property
    def bits(self) -> int:
        return self.input.bits

    @property
    def pow2(self) -> bool:
        return self.input.pow2


def _trace_activations(cfg: ModelConfig, w: WeightSet, y_plane: Tensor) -> list[Tensor]:
    """浮点前向，返回每个逻辑层（激活之后）的输出"""
    outputs = []
    t = y_plane
    layers = iter(w.layers)
    for _ in range(cfg.n_feat):
        t = activate(cfg, apply_layer(next(layers), t))
        outputs.append(t)
    u = t
    for _ in range(cfg.n_map):
        u = activate(cfg, apply_layer(next(layers), u))
        outputs.append(u)
    outputs.append(apply_layer(next(layers), add(t, u)))
    return outputs


def quantize_model(
    w: WeightSet,
    cfg: ModelConfig,
    bits: int = 12,
    pow2: bool = False,
    calib_inputs: list[Tensor] | None = None,
) -> QuantizedModel:
    """
    训练后量化：核按层对齐到各自网格，激活尺度由校准输入的一次浮点前向得到

    :raises ContractError: 权重不是推理形态，或校准集为空
    """
    if w.form is not WeightForm.COLLAPSED:
        raise ContractError(f"quantize_model expects collapsed weights, got {w.form.value}")
    if not calib_inputs:
        raise ContractError("quantize_model needs at least one calibration input")
    validate_weights(cfg, w)

    traces = [_trace_activations(cfg, w, check_input_plane(x)) for x in calib_inputs]
    input_q = calibrate(np.concatenate([x.ravel() for x in calib_inputs]), bits, pow2)

    layers, layer_quant = [], []
    for index, (conv,) in enumerate(w.layers):
        weight_q = calibrate(conv.kernels, bits, pow2)
        act_q = calibrate(np.concatenate([trace[index].ravel() for trace in traces]), bits, pow2)
        layers.append([ConvWeights(fake_quant(conv.kernels, weight_q), conv.bias.copy(), conv.groups)])
        layer_quant.append(LayerQuant(weight=weight_q, activation=act_q))
        logger.debug(
            "layer %s quantized: weight scale=%.6g, activation scale=%.6g", index, weight_q.scale, act_q.scale
        )

    logger.info("quantized %s layers at %s bits (pow2=%s)", len(layers), bits, pow2)
    return QuantizedModel(WeightSet(WeightForm.COLLAPSED, layers), tuple(layer_quant), input_q)


def quantized_forward(cfg: ModelConfig, qmodel: QuantizedModel, y_plane: Tensor) -> Tensor:
    """量化推理：每个逻辑层输出（激活之后）做 fake_quant"""
    check_input_plane(y_plane)
    validate_weights(cfg, qmodel.weights)

    x = fake_quant(y_plane, qmodel.input)
    layers = iter(zip(qmodel.weights.layers, qmodel.layers))

    t = x
    for _ in range(cfg.n_feat):
        layer, lq = next(layers)
        t = fake_quant(activate(cfg, apply_layer(layer, t)), lq.activation)
    u = t
    for _ in range(cfg.n_map):
        layer, lq = next(layers)
        u = fake_quant(activate(cfg, apply_layer(layer, u)), lq.activation)

    layer, lq = next(layers)
    z = fake_quant(apply_layer(layer, add(t, u)), lq.activation)
    return depth_to_space(z + x, cfg.scale)


def model_forward(cfg: ModelConfig, model: WeightSet | QuantizedModel, y_plane: Tensor) -> Tensor:
    """浮点或量化模型的统一前向入口"""
    if isinstance(model, QuantizedModel):
        return quantized_forward(cfg, model, y_plane)
    return forward(cfg, model, y_plane)
