from arsr.dataset import dataset_prep, execute
from arsr.resources.base import Resource
from arsr.resources.serializers import DatasetPrepRequestSerializer


class DatasetPrepResource(Resource):
    """dataset-prep：生成（可选执行）外部编码器命令"""

    RequestSerializer = DatasetPrepRequestSerializer

    def perform_request(self, validated_request_data):
        data = validated_request_data
        dataset_plan = dataset_prep(
            data["src"],
            bitrate=data["bitrate"],
            scale_divisor=data["scale_divisor"],
            codec=data["codec"],
            source_res=data["source_res"],
            out_dir=data["out_dir"],
            vbr=data["vbr"],
        )
        if data["execute"]:
            execute(dataset_plan)
        return {
            "commands": dataset_plan.command_lines(),
            "lr_dir": dataset_plan.lr_dir,
            "hr_dir": dataset_plan.hr_dir,
            "executed": data["execute"],
        }
