import json
import logging
from pathlib import Path

from arsr.core.train import fit, make_patch_pairs
from arsr.exceptions import ContractError, FileAccessError, FormatError, ValidationException
from arsr.formats.history import write_history
from arsr.formats.media import read_media
from arsr.formats.weights import write_weights
from arsr.resources.base import Resource
from arsr.resources.serializers import (
    LossSpecSerializer,
    ModelConfigSerializer,
    TrainConfigSerializer,
    TrainToyRequestSerializer,
)
from arsr.utils.tools import format_serializer_errors, serializer_error_list

logger = logging.getLogger(__name__)


def read_training_config(path: str | None) -> dict:
    """
    读取 JSON 配置：{"model": {...}, "train": {...}, "loss": {...}}，各部分均可省略

    :raises FileAccessError: 文件不可读
    :raises FormatError: 不是 JSON 对象
    """
    if path is None:
        return {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise FileAccessError(path, "read", cause=exc) from exc
    try:
        content = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(path, reason=f"invalid JSON: {exc.msg}", cause=exc) from exc
    if not isinstance(content, dict):
        raise FormatError(path, reason="top level must be a JSON object")
    return content


def _validated(serializer_class, data, section: str):
    serializer = serializer_class(data=data or {})
    if not serializer.is_valid():
        raise ValidationException(
            f"invalid {section} config: {format_serializer_errors(serializer)}",
            field=section,
            errors=serializer_error_list(serializer),
        )
    return serializer


def load_pairs(directory: str, patch: int, scale: int, per_frame: int, seed: int):
    """
    data 目录下 lr/ 与 hr/ 子目录中同名的 PNG 组成训练对，只取 Y 平面

    :raises FileAccessError: 子目录不存在
    :raises ContractError: 没有同名的帧对
    """
    root = Path(directory)
    lr_dir, hr_dir = root / "lr", root / "hr"
    for sub in (lr_dir, hr_dir):
        if not sub.is_dir():
            raise FileAccessError(sub, "list")

    names = sorted(p.name for p in lr_dir.glob("*.png") if (hr_dir / p.name).is_file())
    if not names:
        raise ContractError(f"no matching lr/hr PNG pairs under '{directory}'")
    frames = [(read_media(lr_dir / n).frames[0].y, read_media(hr_dir / n).frames[0].y) for n in names]
    return make_patch_pairs(frames, patch, scale, per_frame=per_frame, seed=seed)


class TrainToyResource(Resource):
    """
    train-toy：在扩展形态上过拟合一小组样本，输出扩展形态权重与损失历史
    """

    RequestSerializer = TrainToyRequestSerializer

    def perform_request(self, validated_request_data):
        data = validated_request_data
        content = read_training_config(data["config"])

        train_data = dict(content.get("train") or {})
        for key in ("epochs", "seed"):
            if data[key] is not None:
                train_data[key] = data[key]
        loss_data = dict(content.get("loss") or {})
        if data["loss"] is not None:
            loss_data["kind"] = data["loss"]

        cfg = _validated(ModelConfigSerializer, content.get("model"), "model").to_config()
        tcfg = _validated(TrainConfigSerializer, train_data, "train").to_config()
        spec = _validated(LossSpecSerializer, loss_data, "loss").to_spec()

        pairs = load_pairs(data["data"], tcfg.patch, cfg.scale, data["per_frame"], tcfg.seed)
        logger.info("training on %s patch pairs: %s epochs, %s loss", len(pairs), tcfg.epochs, spec.kind.value)
        result = fit(cfg, tcfg, spec, pairs)

        write_weights(data["out_weights"], cfg, result.weights)
        if data["history"]:
            write_history(data["history"], result.history)
        return {
            "output": data["out_weights"],
            "pairs": len(pairs),
            "epochs": len(result.history),
            "first_loss": result.history[0] if result.history else None,
            "final_loss": result.history[-1] if result.history else None,
        }
