"""
命令行各子命令对应的 Resource
"""

from arsr.resources.base import Resource
from arsr.resources.dataset import DatasetPrepResource
from arsr.resources.evaluation import EvalResource
from arsr.resources.training import TrainToyResource
from arsr.resources.upscale import UpscaleFrameResource, UpscaleResource
from arsr.resources.weights import CollapseResource, InfoResource, QuantizeResource

__all__ = [
    "CollapseResource",
    "DatasetPrepResource",
    "EvalResource",
    "InfoResource",
    "QuantizeResource",
    "Resource",
    "TrainToyResource",
    "UpscaleFrameResource",
    "UpscaleResource",
]
