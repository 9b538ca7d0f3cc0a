"""
扩展形态的小规模训练器

- 损失：MAE / MSE / Huber，均值归约
- 反向传播：手写，逆序遍历网络数据流（残差加法分流梯度，depth_to_space 做逆排列，
  卷积反向为翻转核的互相关）
- 优化器：带动量的 SGD（可通过 OPTIMIZER_CLASS 配置替换）
- 有限差分梯度检查（float64）

训练只作用于 Y 通道；样本裁剪位置由种子确定，损失历史可逐位复现。
"""

import enum
import logging
from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np

from arsr.core.model import (
    ModelConfig,
    WeightForm,
    WeightSet,
    check_input_plane,
    expand,
    forward,
    validate_weights,
    zeros,
)
from arsr.core.tensor import ConvWeights, Tensor, conv2d, depth_to_space, space_to_depth, windows
from arsr.exceptions import ContractError, DataError, ShapeError

logger = logging.getLogger(__name__)


class LossKind(str, enum.Enum):
    MAE = "mae"
    MSE = "mse"
    HUBER = "huber"


@dataclass(frozen=True)
class LossSpec:
    kind: LossKind = LossKind.MAE
    delta: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "kind", LossKind(self.kind))
        if not self.delta > 0:
            raise ContractError(f"huber delta must be positive, got {self.delta}")


@dataclass(frozen=True)
class TrainConfig:
    lr: float = 0.02
    momentum: float = 0.9
    epochs: int = 100
    batch: int = 4
    patch: int = 16
    seed: int = 0
    # uniform: expand(cfg, seed)；zero: 全零网络（最近邻放大器）
    init: str = "uniform"

    def __post_init__(self):
        if not self.lr > 0:
            raise ContractError(f"learning rate must be positive, got {self.lr}")
        if not 0 <= self.momentum < 1:
            raise ContractError(f"momentum must be in [0, 1), got {self.momentum}")
        if self.batch < 1 or self.epochs < 0:
            raise ContractError("batch must be >= 1 and epochs >= 0")
        if self.init not in ("uniform", "zero"):
            raise ContractError(f"unknown init scheme {self.init!r}")


# ========== 损失 ==========


def loss(pred: Tensor, target: Tensor, spec: LossSpec) -> tuple[float, Tensor]:
    """
    均值归约的损失及其对 pred 的梯度

    :raises ShapeError: pred 与 target 形状不一致
    """
    if pred.shape != target.shape:
        raise ShapeError("loss", expected=pred.shape, actual=target.shape)
    e = pred - target.astype(pred.dtype, copy=False)
    count = e.size

    if spec.kind is LossKind.MSE:
        value = np.mean(e * e, dtype=np.float64)
        grad = 2.0 * e / count
    elif spec.kind is LossKind.MAE:
        value = np.mean(np.abs(e), dtype=np.float64)
        grad = np.sign(e) / count
    else:
        delta = spec.delta
        abs_e = np.abs(e)
        quadratic = abs_e <= delta
        value = np.mean(np.where(quadratic, 0.5 * e * e, delta * (abs_e - 0.5 * delta)), dtype=np.float64)
        grad = np.where(quadratic, e, delta * np.sign(e)) / count
    return float(value), grad.astype(pred.dtype, copy=False)


# ========== 反向传播 ==========


@dataclass(frozen=True, eq=False)
class ConvGrad:
    kernels: np.ndarray
    bias: np.ndarray


@dataclass(frozen=True, eq=False)
class Gradients:
    """与 WeightSet.layers 同构的梯度，以及对输入平面的梯度"""

    layers: tuple[tuple[ConvGrad, ...], ...]
    input: Tensor

    def convs(self) -> list[ConvGrad]:
        return [grad for layer in self.layers for grad in layer]

    def max_abs(self) -> float:
        return max(max(float(np.max(np.abs(g.kernels))), float(np.max(np.abs(g.bias)))) for g in self.convs())


def conv2d_backward(x: Tensor, w: ConvWeights, grad_out: Tensor) -> tuple[Tensor, ConvGrad]:
    """
    卷积的反向：返回 (对输入的梯度, 对核与偏置的梯度)

    对输入的梯度是 grad_out 与翻转、转置后核的 same 互相关。
    """
    f = w.kernel_size
    n_in, m_out = w.in_per_group, w.out_channels // w.groups
    x_view = windows(x, f)
    g_view = windows(grad_out, f)

    grad_x, grad_k = [], []
    for k in range(w.groups):
        out_slice = slice(k * m_out, (k + 1) * m_out)
        in_slice = slice(k * n_in, (k + 1) * n_in)
        grad_k.append(np.einsum("bohw,bchwij->ocij", grad_out[:, out_slice], x_view[:, in_slice], optimize=True))
        flipped = w.kernels[out_slice, :, ::-1, ::-1].transpose(1, 0, 2, 3).astype(grad_out.dtype)
        grad_x.append(np.einsum("bohwij,coij->bchw", g_view[:, out_slice], flipped, optimize=True))

    grad_bias = grad_out.sum(axis=(0, 2, 3))
    return (
        np.concatenate(grad_x, axis=1),
        ConvGrad(np.concatenate(grad_k, axis=0), grad_bias),
    )


@dataclass
class _Tape:
    """前向过程中保存的中间量"""

    conv_inputs: list[list[Tensor]] = field(default_factory=list)
    pre_activations: list[Tensor] = field(default_factory=list)


def _run_layer(layer: Sequence[ConvWeights], x: Tensor, tape: _Tape) -> Tensor:
    inputs = []
    for conv in layer:
        inputs.append(x)
        x = conv2d(x, conv)
    tape.conv_inputs.append(inputs)
    return x


def _activation(cfg: ModelConfig, pre: Tensor, tape: _Tape) -> Tensor:
    tape.pre_activations.append(pre)
    return np.maximum(pre, 0) if cfg.activation == "relu" else pre


def _activation_backward(cfg: ModelConfig, pre: Tensor, grad: Tensor) -> Tensor:
    return grad * (pre > 0) if cfg.activation == "relu" else grad


def forward_with_tape(cfg: ModelConfig, w: WeightSet, y_plane: Tensor) -> tuple[Tensor, _Tape]:
    """与 model.forward 相同的数据流，同时记录反向所需的中间量"""
    check_input_plane(y_plane)
    validate_weights(cfg, w)
    tape = _Tape()
    layers = iter(w.layers)

    t = y_plane
    for _ in range(cfg.n_feat):
        t = _activation(cfg, _run_layer(next(layers), t, tape), tape)
    u = t
    for _ in range(cfg.n_map):
        u = _activation(cfg, _run_layer(next(layers), u, tape), tape)
    z = _run_layer(next(layers), t + u, tape)
    return depth_to_space(z + y_plane.astype(z.dtype, copy=False), cfg.scale), tape


def _layer_backward(layer: Sequence[ConvWeights], inputs: list[Tensor], grad: Tensor) -> tuple[Tensor, list[ConvGrad]]:
    grads = []
    for conv, x in zip(reversed(layer), reversed(inputs)):
        grad, conv_grad = conv2d_backward(x, conv, grad)
        grads.append(conv_grad)
    return grad, grads[::-1]


def backward_with_tape(cfg: ModelConfig, w: WeightSet, tape: _Tape, upstream_grad: Tensor) -> Gradients:
    n_feat, n_map = cfg.n_feat, cfg.n_map
    layer_grads: list[list[ConvGrad]] = [[] for _ in w.layers]

    # depth_to_space 的逆排列；全局残差把 r*r 个通道的梯度汇总回输入平面
    grad_z = space_to_depth(upstream_grad, cfg.scale)
    grad_input = grad_z.sum(axis=1, keepdims=True)

    final = len(w.layers) - 1
    grad_t2, layer_grads[final] = _layer_backward(w.layers[final], tape.conv_inputs[final], grad_z)

    # 内残差：t2 = t + u，两路梯度相同
    grad_u = grad_t2
    for index in reversed(range(n_feat, n_feat + n_map)):
        grad_pre = _activation_backward(cfg, tape.pre_activations[index], grad_u)
        grad_u, layer_grads[index] = _layer_backward(w.layers[index], tape.conv_inputs[index], grad_pre)
    grad_t = grad_t2 + grad_u

    for index in reversed(range(n_feat)):
        grad_pre = _activation_backward(cfg, tape.pre_activations[index], grad_t)
        grad_t, layer_grads[index] = _layer_backward(w.layers[index], tape.conv_inputs[index], grad_pre)

    return Gradients(tuple(tuple(g) for g in layer_grads), grad_t + grad_input)


def backward(cfg: ModelConfig, w: WeightSet, input: Tensor, upstream_grad: Tensor) -> Gradients:
    """
    扩展形态（也适用于推理形态）的权重梯度

    :raises ShapeError: upstream_grad 与前向输出形状不一致
    """
    out, tape = forward_with_tape(cfg, w, input)
    if upstream_grad.shape != out.shape:
        raise ShapeError("backward", expected=out.shape, actual=upstream_grad.shape)
    return backward_with_tape(cfg, w, tape, upstream_grad.astype(out.dtype, copy=False))


# ========== 优化器 ==========


class MomentumSGD:
    """
    带动量的 SGD

        v <- momentum * v + g
        w <- w - lr * v
    """

    def __init__(self, lr: float, momentum: float = 0.9):
        self.lr = lr
        self.momentum = momentum
        self._velocity: list[ConvGrad] | None = None

    def step(self, w: WeightSet, grads: Gradients) -> WeightSet:
        flat_grads = grads.convs()
        if self._velocity is None:
            self._velocity = [ConvGrad(np.zeros_like(g.kernels), np.zeros_like(g.bias)) for g in flat_grads]

        updated, velocity = [], []
        for conv, grad, v in zip(w.convs(), flat_grads, self._velocity):
            v = ConvGrad(self.momentum * v.kernels + grad.kernels, self.momentum * v.bias + grad.bias)
            velocity.append(v)
            updated.append(
                ConvWeights(
                    (conv.kernels - self.lr * v.kernels).astype(conv.kernels.dtype),
                    (conv.bias - self.lr * v.bias).astype(conv.bias.dtype),
                    conv.groups,
                )
            )
        self._velocity = velocity

        it = iter(updated)
        return WeightSet(w.form, [[next(it) for _ in layer] for layer in w.layers])


# ========== 训练 ==========


@dataclass(frozen=True, eq=False)
class FitResult:
    weights: WeightSet
    history: list[float]


def _check_pairs(cfg: ModelConfig, pairs: Sequence[tuple[Tensor, Tensor]]) -> None:
    if not pairs:
        raise DataError("training needs at least one (lr, hr) patch pair")
    lr_shape = pairs[0][0].shape
    for index, (lr, hr) in enumerate(pairs):
        if lr.ndim != 4 or lr.shape[:2] != (1, 1) or lr.shape != lr_shape:
            raise DataError(f"pair {index}: lr patch {lr.shape} must be (1, 1, h, w) and match {lr_shape}")
        expected = (1, 1, lr.shape[2] * cfg.scale, lr.shape[3] * cfg.scale)
        if hr.shape != expected:
            raise DataError(f"pair {index}: hr patch {hr.shape} must be {expected} (lr x {cfg.scale})")


def initial_weights(cfg: ModelConfig, tcfg: TrainConfig) -> WeightSet:
    if tcfg.init == "zero":
        return zeros(cfg, WeightForm.EXPANDED)
    return expand(cfg, tcfg.seed)


def fit(
    cfg: ModelConfig,
    tcfg: TrainConfig,
    spec: LossSpec,
    pairs: Sequence[tuple[Tensor, Tensor]],
    weights: WeightSet | None = None,
) -> FitResult:
    """
    在扩展形态上训练，返回最终权重与每个 epoch 的平均损失

    单线程、顺序固定：相同种子与数据得到逐位相同的损失历史。

    :raises DataError: 样本对为空或尺寸不满足 hr = lr × r
    """
    from arsr.settings import arsr_settings

    _check_pairs(cfg, pairs)
    largest_kernel = max((*cfg.feat_kernels, cfg.map_kernel, cfg.final_kernel))
    if min(pairs[0][0].shape[2:]) < largest_kernel:
        raise ContractError(f"patch {pairs[0][0].shape[2:]} is smaller than the largest kernel {largest_kernel}")

    w = weights if weights is not None else initial_weights(cfg, tcfg)
    if w.form is not WeightForm.EXPANDED:
        raise ContractError(f"fit trains expanded weights, got {w.form.value}")
    optimizer = arsr_settings.OPTIMIZER_CLASS(tcfg.lr, tcfg.momentum)

    lr_all = np.concatenate([lr for lr, _ in pairs]).astype(np.float32)
    hr_all = np.concatenate([hr for _, hr in pairs]).astype(np.float32)

    history = []
    for epoch in range(tcfg.epochs):
        batch_losses = []
        for start in range(0, len(pairs), tcfg.batch):
            x = lr_all[start : start + tcfg.batch]
            target = hr_all[start : start + tcfg.batch]
            pred, tape = forward_with_tape(cfg, w, x)
            value, grad = loss(pred, target, spec)
            w = optimizer.step(w, backward_with_tape(cfg, w, tape, grad))
            batch_losses.append(value)
        history.append(float(np.mean(batch_losses)))
        logger.debug("epoch %s/%s: %s loss %.6g", epoch + 1, tcfg.epochs, spec.kind.value, history[-1])

    if history:
        logger.info("training finished: %s epochs, loss %.6g -> %.6g", len(history), history[0], history[-1])
    return FitResult(w, history)


def make_patch_pairs(
    frames: Sequence[tuple[np.ndarray, np.ndarray]],
    patch: int,
    scale: int,
    per_frame: int = 1,
    seed: int = 0,
) -> list[tuple[Tensor, Tensor]]:
    """
    从 (LR 平面, HR 平面) 对中按种子裁剪固定位置的训练块

    :param frames: 二维 Y 平面对，HR 尺寸至少为 LR × scale
    """
    rng = np.random.default_rng(seed)
    pairs = []
    for index, (lr, hr) in enumerate(frames):
        h, w = lr.shape
        if h < patch or w < patch:
            raise DataError(f"frame {index}: lr plane {lr.shape} is smaller than patch {patch}")
        if hr.shape[0] < h * scale or hr.shape[1] < w * scale:
            raise DataError(f"frame {index}: hr plane {hr.shape} is smaller than lr {lr.shape} x {scale}")
        for _ in range(per_frame):
            y0 = int(rng.integers(0, h - patch + 1))
            x0 = int(rng.integers(0, w - patch + 1))
            lr_patch = lr[y0 : y0 + patch, x0 : x0 + patch]
            hr_patch = hr[y0 * scale : (y0 + patch) * scale, x0 * scale : (x0 + patch) * scale]
            pairs.append(
                (
                    np.ascontiguousarray(lr_patch, np.float32)[None, None],
                    np.ascontiguousarray(hr_patch, np.float32)[None, None],
                )
            )
    return pairs


# ========== 梯度检查 ==========


@dataclass(frozen=True)
class GradientCheckEntry:
    layer: int
    conv: int
    param: str
    max_abs_error: float
    passed: bool


@dataclass(frozen=True)
class GradientReport:
    entries: tuple[GradientCheckEntry, ...]

    @property
    def passed(self) -> bool:
        return all(entry.passed for entry in self.entries)

    def failures(self) -> list[GradientCheckEntry]:
        return [entry for entry in self.entries if not entry.passed]


def _compare(analytic: np.ndarray, numeric: np.ndarray, atol: float, rtol: float) -> tuple[float, bool]:
    error = np.abs(analytic - numeric)
    allowed = np.maximum(atol, rtol * np.abs(analytic))
    return float(np.max(error)), bool(np.all(error <= allowed))


def check_gradients(
    cfg: ModelConfig,
    w: WeightSet,
    x: Tensor,
    target: Tensor,
    spec: LossSpec,
    eps: float = 1e-3,
    atol: float = 1e-2,
    rtol: float = 0.02,
    include_input: bool = True,
) -> GradientReport:
    """
    中心差分校验每个核与偏置的梯度（以及输入平面的梯度）

    计算全程在 float64 下进行。
    """
    w64 = w.astype(np.float64)
    x64 = np.array(x, dtype=np.float64)
    target64 = np.asarray(target, dtype=np.float64)

    def objective() -> float:
        return loss(forward(cfg, w64, x64), target64, spec)[0]

    pred, tape = forward_with_tape(cfg, w64, x64)
    _, grad = loss(pred, target64, spec)
    analytic = backward_with_tape(cfg, w64, tape, grad)

    def numeric_grad(array: np.ndarray) -> np.ndarray:
        result = np.zeros_like(array)
        flat, out = array.reshape(-1), result.reshape(-1)
        for i in range(flat.size):
            original = flat[i]
            flat[i] = original + eps
            plus = objective()
            flat[i] = original - eps
            minus = objective()
            flat[i] = original
            out[i] = (plus - minus) / (2 * eps)
        return result

    entries = []
    for layer_index, (layer, layer_grads) in enumerate(zip(w64.layers, analytic.layers)):
        for conv_index, (conv, conv_grad) in enumerate(zip(layer, layer_grads)):
            for param in ("kernels", "bias"):
                numeric = numeric_grad(getattr(conv, param))
                max_error, passed = _compare(getattr(conv_grad, param), numeric, atol, rtol)
                entries.append(GradientCheckEntry(layer_index, conv_index, param, max_error, passed))

    if include_input:
        max_error, passed = _compare(analytic.input, numeric_grad(x64), atol, rtol)
        entries.append(GradientCheckEntry(-1, 0, "input", max_error, passed))

    report = GradientReport(tuple(entries))
    if not report.passed:
        logger.warning("gradient check failed for %s parameter groups", len(report.failures()))
    return report
