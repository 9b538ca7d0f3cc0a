"""
权重文件：文本清单（manifest）+ 二进制数据块

清单为 key=value 行，按 key 排序输出，浮点数使用 repr（最短可逆表示），
因此 写 -> 读 -> 写 字节一致。数据块与清单同名加 .bin 后缀，
内容为小端 float32，按网络顺序逐个卷积写入：先核，后偏置。

清单字段：
    version                       格式版本，读取时必须受支持
    form                          expanded | collapsed
    config.<field>                ModelConfig 字段
    layer.<i>.conv.<j>.shape      核形状 o,c,f,f
    layer.<i>.conv.<j>.groups     分组数
    layer.<i>.conv.<j>.kernels    数据块中的字节偏移
    layer.<i>.conv.<j>.bias       数据块中的字节偏移
    quant.*                       量化模型的尺度（仅量化模型）
"""

import logging
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from arsr.core.model import ModelConfig, WeightForm, WeightSet, validate_weights
from arsr.core.quant import LayerQuant, QuantizedModel, QuantParams
from arsr.core.tensor import ConvWeights
from arsr.exceptions import ArsrException, FileAccessError, FormatError, VersionMismatchError

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1
SUPPORTED_VERSIONS = [FORMAT_VERSION]
BLOB_SUFFIX = ".bin"
BLOB_DTYPE = np.dtype("<f4")

_INT_FIELDS = ("n_feat", "n_map", "base_channels", "expansion", "map_kernel", "groups", "scale", "final_kernel")


def blob_path(path: str | os.PathLike) -> Path:
    path = Path(path)
    return path.with_name(path.name + BLOB_SUFFIX)


def _fmt_float(value: float) -> str:
    return repr(float(value))


def _fmt_bool(value: bool) -> str:
    return "true" if value else "false"


def _fmt_ints(values) -> str:
    return ",".join(str(int(v)) for v in values)


def _conv_key(layer: int, conv: int, name: str) -> str:
    return f"layer.{layer:03d}.conv.{conv}.{name}"


def _quant_entries(prefix: str, q: QuantParams) -> dict[str, str]:
    return {
        f"{prefix}.bits": str(q.bits),
        f"{prefix}.scale": _fmt_float(q.scale),
        f"{prefix}.pow2": _fmt_bool(q.pow2),
    }


@dataclass(frozen=True, eq=False)
class WeightFile:
    """读到的权重文件：配置 + 浮点权重或量化模型 + 原始清单"""

    cfg: ModelConfig
    model: WeightSet | QuantizedModel
    manifest: dict[str, str] = field(default_factory=dict)

    @property
    def weights(self) -> WeightSet:
        return self.model.weights if isinstance(self.model, QuantizedModel) else self.model

    @property
    def quantized(self) -> bool:
        return isinstance(self.model, QuantizedModel)

    @property
    def param_count(self) -> int:
        return self.weights.param_count


def build_manifest(cfg: ModelConfig, model: WeightSet | QuantizedModel, blob_name: str) -> tuple[dict[str, str], bytes]:
    """生成清单字典与数据块字节"""
    weights = model.weights if isinstance(model, QuantizedModel) else model
    validate_weights(cfg, weights)

    manifest = {
        "version": str(FORMAT_VERSION),
        "form": weights.form.value,
        "blob": blob_name,
        "param_count": str(weights.param_count),
    }
    for name, value in cfg.to_dict().items():
        if name == "feat_kernels":
            manifest[f"config.{name}"] = _fmt_ints(value)
        else:
            manifest[f"config.{name}"] = str(value)

    chunks, offset = [], 0
    for i, layer in enumerate(weights.layers):
        for j, conv in enumerate(layer):
            manifest[_conv_key(i, j, "shape")] = _fmt_ints(conv.shape)
            manifest[_conv_key(i, j, "groups")] = str(conv.groups)
            for name, array in (("kernels", conv.kernels), ("bias", conv.bias)):
                data = np.ascontiguousarray(array, dtype=BLOB_DTYPE).tobytes()
                manifest[_conv_key(i, j, name)] = str(offset)
                chunks.append(data)
                offset += len(data)
    manifest["blob.bytes"] = str(offset)

    if isinstance(model, QuantizedModel):
        manifest.update(_quant_entries("quant.input", model.input))
        for i, lq in enumerate(model.layers):
            manifest.update(_quant_entries(f"quant.layer.{i:03d}.weight", lq.weight))
            manifest.update(_quant_entries(f"quant.layer.{i:03d}.activation", lq.activation))

    return manifest, b"".join(chunks)


def format_manifest(manifest: dict[str, str]) -> str:
    return "".join(f"{key}={manifest[key]}\n" for key in sorted(manifest))


def parse_manifest(text: str, path: str | os.PathLike | None = None) -> dict[str, str]:
    """
    :raises FormatError: 行不是 key=value，或 key 重复
    :raises VersionMismatchError: 缺少版本字段或版本不受支持
    """
    manifest = {}
    for number, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        key, sep, value = line.partition("=")
        if not sep or not key:
            raise FormatError(path, reason=f"line {number} is not key=value")
        if key in manifest:
            raise FormatError(path, reason=f"duplicate key {key!r}")
        manifest[key] = value

    version = manifest.get("version")
    if version is None:
        raise FormatError(path, reason="manifest lacks a version field")
    if version not in {str(v) for v in SUPPORTED_VERSIONS}:
        raise VersionMismatchError(path, version, SUPPORTED_VERSIONS)
    return manifest


class _Manifest:
    """带路径信息的取值辅助"""

    def __init__(self, manifest: dict[str, str], path):
        self.manifest = manifest
        self.path = path

    def get(self, key: str) -> str:
        try:
            return self.manifest[key]
        except KeyError:
            raise FormatError(self.path, reason=f"manifest lacks {key!r}") from None

    def get_int(self, key: str) -> int:
        try:
            return int(self.get(key))
        except ValueError:
            raise FormatError(self.path, reason=f"{key} is not an integer") from None

    def get_float(self, key: str) -> float:
        try:
            return float(self.get(key))
        except ValueError:
            raise FormatError(self.path, reason=f"{key} is not a number") from None

    def get_bool(self, key: str) -> bool:
        value = self.get(key)
        if value not in ("true", "false"):
            raise FormatError(self.path, reason=f"{key} must be true or false")
        return value == "true"

    def get_ints(self, key: str) -> tuple[int, ...]:
        try:
            return tuple(int(v) for v in self.get(key).split(","))
        except ValueError:
            raise FormatError(self.path, reason=f"{key} is not a list of integers") from None

    def quant(self, prefix: str) -> QuantParams:
        try:
            return QuantParams(
                bits=self.get_int(f"{prefix}.bits"),
                scale=self.get_float(f"{prefix}.scale"),
                pow2=self.get_bool(f"{prefix}.pow2"),
            )
        except FormatError:
            raise
        except ArsrException as exc:
            raise FormatError(self.path, reason=f"{prefix}: {exc.message}") from exc


def _read_config(m: _Manifest) -> ModelConfig:
    kwargs = {name: m.get_int(f"config.{name}") for name in _INT_FIELDS}
    kwargs["feat_kernels"] = m.get_ints("config.feat_kernels")
    kwargs["activation"] = m.get("config.activation")
    try:
        return ModelConfig(**kwargs)
    except ArsrException as exc:
        raise FormatError(m.path, reason=f"invalid config: {exc.message}") from exc


def _slice_blob(blob: bytes, offset: int, count: int, m: _Manifest) -> np.ndarray:
    end = offset + count * BLOB_DTYPE.itemsize
    if offset < 0 or end > len(blob):
        raise FormatError(m.path, reason=f"blob too short for {count} values at byte {offset}")
    return np.frombuffer(blob, dtype=BLOB_DTYPE, count=count, offset=offset).astype(np.float32)


def _read_weight_set(m: _Manifest, cfg: ModelConfig, blob: bytes) -> WeightSet:
    try:
        form = WeightForm(m.get("form"))
    except ValueError:
        raise FormatError(m.path, reason=f"unknown form {m.get('form')!r}") from None

    convs_per_layer = 2 if form is WeightForm.EXPANDED else 1
    layers = []
    for i in range(cfg.n_layers):
        layer = []
        for j in range(convs_per_layer):
            shape = m.get_ints(_conv_key(i, j, "shape"))
            if len(shape) != 4:
                raise FormatError(m.path, reason=f"{_conv_key(i, j, 'shape')} must have 4 entries")
            kernels = _slice_blob(blob, m.get_int(_conv_key(i, j, "kernels")), int(np.prod(shape)), m)
            bias = _slice_blob(blob, m.get_int(_conv_key(i, j, "bias")), shape[0], m)
            groups = m.get_int(_conv_key(i, j, "groups"))
            try:
                layer.append(ConvWeights(kernels.reshape(shape), bias, groups))
            except ArsrException as exc:
                raise FormatError(m.path, reason=f"{_conv_key(i, j, 'shape')}: {exc.message}") from exc
        layers.append(layer)

    weights = WeightSet(form, layers)
    try:
        validate_weights(cfg, weights)
    except ArsrException as exc:
        raise FormatError(m.path, reason=f"layers disagree with config: {exc.message}") from exc
    if weights.param_count != m.get_int("param_count"):
        raise FormatError(m.path, reason=f"param_count {m.get('param_count')} disagrees with layer shapes")
    return weights


def load_weights(manifest: dict[str, str], blob: bytes, path=None) -> WeightFile:
    m = _Manifest(manifest, path)
    if len(blob) != m.get_int("blob.bytes"):
        raise FormatError(path, reason=f"blob has {len(blob)} bytes, manifest says {m.get('blob.bytes')}")
    cfg = _read_config(m)
    weights = _read_weight_set(m, cfg, blob)

    model: WeightSet | QuantizedModel = weights
    if "quant.input.bits" in manifest:
        layers = tuple(
            LayerQuant(
                weight=m.quant(f"quant.layer.{i:03d}.weight"),
                activation=m.quant(f"quant.layer.{i:03d}.activation"),
            )
            for i in range(cfg.n_layers)
        )
        model = QuantizedModel(weights, layers, m.quant("quant.input"))
    return WeightFile(cfg, model, dict(manifest))


def read_weights(path: str | os.PathLike) -> WeightFile:
    """
    :raises FileAccessError: 清单或数据块不可读
    :raises FormatError: 清单格式错误，或与数据块不一致
    :raises VersionMismatchError: 版本不受支持
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="ascii")
    except UnicodeDecodeError as exc:
        raise FormatError(path, reason="manifest is not ASCII text", cause=exc) from exc
    except OSError as exc:
        raise FileAccessError(path, "read", cause=exc) from exc

    manifest = parse_manifest(text, path)
    data_path = path.with_name(_Manifest(manifest, path).get("blob"))
    try:
        blob = data_path.read_bytes()
    except OSError as exc:
        raise FileAccessError(data_path, "read", cause=exc) from exc

    weight_file = load_weights(manifest, blob, path)
    logger.debug("read %s: %s, %s params", path, weight_file.weights.form.value, weight_file.param_count)
    return weight_file


def write_weights(path: str | os.PathLike, cfg: ModelConfig, model: WeightSet | QuantizedModel) -> None:
    path = Path(path)
    data_path = blob_path(path)
    manifest, blob = build_manifest(cfg, model, data_path.name)
    try:
        data_path.write_bytes(blob)
        path.write_text(format_manifest(manifest), encoding="ascii")
    except OSError as exc:
        raise FileAccessError(path, "write", cause=exc) from exc
    logger.debug("wrote %s (%s bytes of weights)", path, len(blob))
