import logging
import math

import numpy as np

from arsr.dataset import vmaf_command
from arsr.exceptions import ContractError
from arsr.formats.media import read_media
from arsr.metrics import evaluate
from arsr.resources.base import Resource
from arsr.resources.serializers import EvalRequestSerializer

logger = logging.getLogger(__name__)


def mean_score(scores: list[float]) -> float:
    """均值只计有限分数（完全相同的帧 PSNR 为 inf）；全部为 inf 时为 inf"""
    finite = [s for s in scores if math.isfinite(s)]
    if not finite:
        return math.inf
    return float(np.mean(finite))


class EvalResource(Resource):
    """
    eval：逐帧比较参考与待测（PNG 对或 Y4M 对），输出每帧分数与均值

    VMAF 不在本工具内计算，返回值附带外部 VMAF 的调用方式。
    """

    RequestSerializer = EvalRequestSerializer

    def perform_request(self, validated_request_data):
        data = validated_request_data
        ref = read_media(data["ref"])
        test = read_media(data["test"])
        if len(ref.frames) != len(test.frames):
            raise ContractError(f"reference has {len(ref.frames)} frames, test has {len(test.frames)}")

        scores = [evaluate(a, b, data["metric"]) for a, b in zip(ref.frames, test.frames)]
        mean = mean_score(scores)
        logger.info("%s over %s frames: mean %s", data["metric"], len(scores), mean)
        return {
            "metric": data["metric"],
            "scores": scores,
            "mean": mean,
            "vmaf_command": vmaf_command(data["ref"], data["test"]),
        }
