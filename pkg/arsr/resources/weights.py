import logging
from pathlib import Path

import numpy as np

from arsr.core.model import WeightForm, collapse
from arsr.core.quant import quantize_model
from arsr.exceptions import ContractError, FileAccessError
from arsr.formats.media import read_media
from arsr.formats.weights import read_weights, write_weights
from arsr.resources.base import Resource
from arsr.resources.serializers import (
    CollapseRequestSerializer,
    InfoRequestSerializer,
    InfoResponseSerializer,
    QuantizeRequestSerializer,
)

logger = logging.getLogger(__name__)

CALIB_SUFFIXES = (".png", ".y4m")


def calibration_planes(directory: str) -> list[np.ndarray]:
    """
    校准目录下全部 PNG / Y4M 帧的 Y 平面，形状 (1, 1, h, w)，按文件名排序

    :raises FileAccessError: 目录不存在
    :raises ContractError: 目录中没有可用的帧
    """
    root = Path(directory)
    if not root.is_dir():
        raise FileAccessError(root, "list")
    planes = []
    for path in sorted(p for p in root.iterdir() if p.suffix.lower() in CALIB_SUFFIXES):
        planes.extend(frame.y[None, None] for frame in read_media(path).frames)
    if not planes:
        raise ContractError(f"calibration directory '{directory}' has no PNG or Y4M frames")
    return planes


class CollapseResource(Resource):
    """collapse：扩展形态权重文件 -> 推理形态权重文件"""

    RequestSerializer = CollapseRequestSerializer

    def perform_request(self, validated_request_data):
        weight_file = read_weights(validated_request_data["in_weights"])
        collapsed = collapse(weight_file.cfg, weight_file.weights)
        write_weights(validated_request_data["out_weights"], weight_file.cfg, collapsed)
        return {
            "output": validated_request_data["out_weights"],
            "params_before": weight_file.param_count,
            "params_after": collapsed.param_count,
        }


class QuantizeResource(Resource):
    """
    quantize：训练后量化

    输入为扩展形态时先折叠；校准集为目录中的全部帧。
    """

    RequestSerializer = QuantizeRequestSerializer

    def perform_request(self, validated_request_data):
        data = validated_request_data
        weight_file = read_weights(data["weights"])
        if weight_file.quantized:
            raise ContractError(f"'{data['weights']}' is already quantized")

        weights = weight_file.weights
        if weights.form is WeightForm.EXPANDED:
            logger.info("collapsing expanded weights before quantization")
            weights = collapse(weight_file.cfg, weights)

        qmodel = quantize_model(
            weights,
            weight_file.cfg,
            bits=data["bits"],
            pow2=data["pow2"],
            calib_inputs=calibration_planes(data["calib"]),
        )
        write_weights(data["out"], weight_file.cfg, qmodel)
        return {
            "output": data["out"],
            "bits": data["bits"],
            "pow2": data["pow2"],
            "input_scale": qmodel.input.scale,
            "weight_scales": [lq.weight.scale for lq in qmodel.layers],
            "activation_scales": [lq.activation.scale for lq in qmodel.layers],
        }


class InfoResource(Resource):
    """info：清单内容与参数量"""

    RequestSerializer = InfoRequestSerializer
    ResponseSerializer = InfoResponseSerializer

    def perform_request(self, validated_request_data):
        weight_file = read_weights(validated_request_data["weights"])
        return {
            "path": validated_request_data["weights"],
            "form": weight_file.weights.form.value,
            "quantized": weight_file.quantized,
            "param_count": weight_file.param_count,
            "manifest": weight_file.manifest,
        }
