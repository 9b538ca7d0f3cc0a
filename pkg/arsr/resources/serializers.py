"""
请求参数序列化器

模型与训练配置的取值范围在这里集中声明；未提供的字段取 ARSR 配置中的
DEFAULT_MODEL / DEFAULT_TRAIN。
"""

from rest_framework import serializers

from arsr.core.model import DEFAULT_FEAT_KERNELS, SUPPORTED_GROUPS, SUPPORTED_SCALES, ModelConfig
from arsr.core.quant import MAX_BITS, MIN_BITS
from arsr.core.train import LossKind, LossSpec, TrainConfig
from arsr.exceptions import ContractError
from arsr.formats.image import COLOR_MATRICES
from arsr.metrics import METRICS
from arsr.pipeline.frame import CHROMA_METHODS, Frame
from arsr.pipeline.planner import FramePlan, parse_resolution
from arsr.pipeline.resample import METHODS


class ResolutionField(serializers.CharField):
    """'WIDTHxHEIGHT' -> (width, height)"""

    def to_internal_value(self, data):
        text = super().to_internal_value(data)
        try:
            return parse_resolution(text)
        except ContractError as exc:
            raise serializers.ValidationError(exc.message) from exc

    def to_representation(self, value):
        return f"{value[0]}x{value[1]}"


class InstanceField(serializers.Field):
    """透传内存对象（帧、规划、权重），只校验类型"""

    def __init__(self, instance_type, **kwargs):
        self.instance_type = instance_type
        super().__init__(**kwargs)

    def to_internal_value(self, data):
        if not isinstance(data, self.instance_type):
            raise serializers.ValidationError(f"expected {self.instance_type.__name__}, got {type(data).__name__}")
        return data

    def to_representation(self, value):
        return value


def _check_odd(value: int) -> int:
    if value % 2 == 0:
        raise serializers.ValidationError("kernel size must be odd")
    return value


class ModelConfigSerializer(serializers.Serializer):
    n_feat = serializers.IntegerField(min_value=1, max_value=3, required=False)
    n_map = serializers.IntegerField(min_value=1, max_value=11, required=False)
    base_channels = serializers.IntegerField(min_value=1, required=False)
    expansion = serializers.IntegerField(min_value=1, required=False)
    feat_kernels = serializers.ListField(
        child=serializers.IntegerField(min_value=1, validators=[_check_odd]),
        min_length=1,
        max_length=3,
        required=False,
    )
    map_kernel = serializers.IntegerField(min_value=1, validators=[_check_odd], required=False)
    groups = serializers.ChoiceField(choices=SUPPORTED_GROUPS, required=False)
    scale = serializers.ChoiceField(choices=SUPPORTED_SCALES, required=False)
    final_kernel = serializers.IntegerField(min_value=1, validators=[_check_odd], required=False)
    activation = serializers.ChoiceField(choices=("relu", "identity"), required=False)

    def validate(self, attrs):
        from arsr.settings import arsr_settings

        merged = dict(arsr_settings.DEFAULT_MODEL)
        if "n_feat" in attrs and "feat_kernels" not in attrs:
            merged["feat_kernels"] = list(DEFAULT_FEAT_KERNELS[attrs["n_feat"]])
        merged.update(attrs)

        if len(merged["feat_kernels"]) != merged["n_feat"]:
            raise serializers.ValidationError(
                {"feat_kernels": f"needs exactly n_feat={merged['n_feat']} kernel sizes"}
            )
        for name in ("base_channels", "expansion"):
            if merged[name] % merged["groups"]:
                raise serializers.ValidationError({"groups": f"must divide {name}={merged[name]}"})
        return merged

    def to_config(self) -> ModelConfig:
        data = dict(self.validated_data)
        data["feat_kernels"] = tuple(data["feat_kernels"])
        return ModelConfig(**data)


class TrainConfigSerializer(serializers.Serializer):
    lr = serializers.FloatField(min_value=1e-12, required=False)
    momentum = serializers.FloatField(min_value=0.0, required=False)
    epochs = serializers.IntegerField(min_value=0, required=False)
    batch = serializers.IntegerField(min_value=1, required=False)
    patch = serializers.IntegerField(min_value=1, required=False)
    seed = serializers.IntegerField(min_value=0, required=False)
    init = serializers.ChoiceField(choices=("uniform", "zero"), required=False)

    def validate_momentum(self, value):
        if value >= 1.0:
            raise serializers.ValidationError("momentum must be below 1")
        return value

    def validate(self, attrs):
        from arsr.settings import arsr_settings

        merged = dict(arsr_settings.DEFAULT_TRAIN)
        merged.update(attrs)
        return merged

    def to_config(self) -> TrainConfig:
        return TrainConfig(**self.validated_data)


class LossSpecSerializer(serializers.Serializer):
    kind = serializers.ChoiceField(choices=[k.value for k in LossKind], default=LossKind.MAE.value)
    delta = serializers.FloatField(min_value=1e-12, default=1.0)

    def to_spec(self) -> LossSpec:
        return LossSpec(**self.validated_data)


# ========== 各命令请求 ==========


class UpscaleRequestSerializer(serializers.Serializer):
    input = serializers.CharField()
    output = serializers.CharField()
    weights = serializers.ListField(child=serializers.CharField(), required=False, default=list)
    target_res = ResolutionField()
    chroma = serializers.ChoiceField(choices=CHROMA_METHODS, required=False, allow_null=True, default=None)
    method = serializers.ChoiceField(choices=("arsr", *METHODS), default="arsr")
    matrix = serializers.ChoiceField(choices=tuple(COLOR_MATRICES), required=False, allow_null=True, default=None)

    def validate(self, attrs):
        if attrs["method"] == "arsr" and not attrs["weights"]:
            raise serializers.ValidationError({"weights": "the arsr method needs at least one weight file"})
        return attrs


class UpscaleFrameRequestSerializer(serializers.Serializer):
    frame = InstanceField(Frame)
    plan = InstanceField(FramePlan)
    chroma = serializers.ChoiceField(choices=CHROMA_METHODS, required=False, allow_null=True, default=None)
    method = serializers.ChoiceField(choices=("arsr", *METHODS), default="arsr")


class CollapseRequestSerializer(serializers.Serializer):
    in_weights = serializers.CharField()
    out_weights = serializers.CharField()


class QuantizeRequestSerializer(serializers.Serializer):
    weights = serializers.CharField()
    bits = serializers.IntegerField(
        min_value=MIN_BITS, max_value=MAX_BITS, required=False, allow_null=True, default=None
    )
    pow2 = serializers.BooleanField(required=False, allow_null=True, default=None)
    calib = serializers.CharField()
    out = serializers.CharField()

    def validate(self, attrs):
        from arsr.settings import arsr_settings

        if attrs.get("bits") is None:
            attrs["bits"] = arsr_settings.QUANT_BITS
        if attrs.get("pow2") is None:
            attrs["pow2"] = arsr_settings.QUANT_POW2
        return attrs


class TrainToyRequestSerializer(serializers.Serializer):
    data = serializers.CharField()
    config = serializers.CharField(required=False, allow_null=True, default=None)
    loss = serializers.ChoiceField(choices=[k.value for k in LossKind], required=False, allow_null=True, default=None)
    out_weights = serializers.CharField()
    history = serializers.CharField(required=False, allow_null=True, default=None)
    epochs = serializers.IntegerField(min_value=0, required=False, allow_null=True, default=None)
    seed = serializers.IntegerField(min_value=0, required=False, allow_null=True, default=None)
    per_frame = serializers.IntegerField(min_value=1, default=1)


class EvalRequestSerializer(serializers.Serializer):
    ref = serializers.CharField()
    test = serializers.CharField()
    metric = serializers.ChoiceField(choices=METRICS, default="psnr")


class DatasetPrepRequestSerializer(serializers.Serializer):
    src = serializers.CharField()
    bitrate = serializers.IntegerField(min_value=1, required=False, allow_null=True, default=None)
    scale_divisor = serializers.IntegerField(min_value=1, default=4)
    codec = serializers.CharField(required=False, allow_null=True, default=None)
    source_res = ResolutionField(required=False, allow_null=True, default=None)
    out_dir = serializers.CharField(required=False, allow_null=True, default=None)
    vbr = serializers.BooleanField(default=False)
    execute = serializers.BooleanField(default=False)


class InfoRequestSerializer(serializers.Serializer):
    weights = serializers.CharField()


class InfoResponseSerializer(serializers.Serializer):
    path = serializers.CharField()
    form = serializers.ChoiceField(choices=("expanded", "collapsed"))
    quantized = serializers.BooleanField()
    param_count = serializers.IntegerField(min_value=0)
    manifest = serializers.DictField(child=serializers.CharField(allow_blank=True))
