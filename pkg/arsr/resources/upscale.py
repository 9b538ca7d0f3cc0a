import logging

from arsr.core.model import ModelConfig, WeightForm, WeightSet
from arsr.core.quant import QuantizedModel
from arsr.exceptions import ContractError
from arsr.formats.media import read_media, write_media
from arsr.formats.weights import read_weights
from arsr.pipeline.frame import Frame, baseline_upscale_frame, upscale_frame
from arsr.pipeline.planner import plan
from arsr.resources.base import Resource
from arsr.resources.serializers import UpscaleFrameRequestSerializer, UpscaleRequestSerializer

logger = logging.getLogger(__name__)

Network = tuple[ModelConfig, WeightSet | QuantizedModel]


def load_networks(paths: list[str]) -> dict[int, Network]:
    """
    按倍率索引的推理权重；扩展形态的文件不能直接用于推理

    :raises ContractError: 同一倍率出现多个文件，或文件不是推理形态
    """
    networks: dict[int, Network] = {}
    for path in paths:
        weight_file = read_weights(path)
        if weight_file.weights.form is not WeightForm.COLLAPSED:
            raise ContractError(f"'{path}' holds expanded weights; run collapse first")
        scale = weight_file.cfg.scale
        if scale in networks:
            raise ContractError(f"more than one weight file for x{scale}")
        networks[scale] = (weight_file.cfg, weight_file.model)
    return networks


class UpscaleFrameResource(Resource):
    """
    放大单帧

    context 中的 networks 为 {倍率: (ModelConfig, 权重)}
    """

    RequestSerializer = UpscaleFrameRequestSerializer

    def perform_request(self, validated_request_data) -> Frame:
        frame = validated_request_data["frame"]
        frame_plan = validated_request_data["plan"]
        method = validated_request_data["method"]
        if method != "arsr":
            return baseline_upscale_frame(frame, frame_plan.output_res, method)

        cfg, model = self.context.get("networks", {}).get(frame_plan.net_factor, (None, None))
        return upscale_frame(frame, frame_plan, cfg, model, validated_request_data["chroma"])


class UpscaleResource(Resource):
    """
    upscale：PNG 或 Y4M 输入，按目标分辨率规划后逐帧放大（多帧并发，按序写出）
    """

    RequestSerializer = UpscaleRequestSerializer

    def perform_request(self, validated_request_data):
        data = validated_request_data
        media = read_media(data["input"], data["matrix"])
        networks = load_networks(data["weights"]) if data["method"] == "arsr" else {}

        frame_plan = plan(media.resolution, data["target_res"], factors=tuple(sorted(networks, reverse=True)))
        logger.info(
            "upscale %s: %sx%s -> %sx%s (%s, net x%s, lanczos=%s, %s frames)",
            data["input"],
            *frame_plan.input_res,
            *frame_plan.output_res,
            data["method"],
            frame_plan.net_factor,
            frame_plan.uses_lanczos,
            len(media.frames),
        )

        frame_resource = UpscaleFrameResource(networks=networks)
        requests = [
            {"frame": frame, "plan": frame_plan, "chroma": data["chroma"], "method": data["method"]}
            for frame in media.frames
        ]
        if len(requests) == 1:
            outputs = [frame_resource.request(requests[0])]
        else:
            outputs = frame_resource.bulk_request(requests)

        write_media(data["output"], outputs, like=media, matrix=data["matrix"])
        return {
            "output": data["output"],
            "input_res": frame_plan.input_res,
            "output_res": frame_plan.output_res,
            "net_factor": frame_plan.net_factor,
            "lanczos": frame_plan.uses_lanczos,
            "frames": len(outputs),
        }
