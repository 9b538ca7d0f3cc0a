import pytest
from rest_framework import serializers

from arsr.exceptions import (
    ArsrException,
    ContractError,
    DataError,
    EncoderNotFoundError,
    ErrorCode,
    ErrorCodeRegistry,
    ExitCode,
    FileAccessError,
    FormatError,
    ParameterInvalidError,
    ShapeError,
    StandardErrorCodes,
    ValidationException,
    ValueOutOfRangeError,
    VersionMismatchError,
    current_trace_id,
    handle_exception,
    trace,
)
from arsr.utils.thread_backend import ThreadPool


class TestArsrException:
    """测试 ArsrException 基类"""

    def test_default_message(self):
        """测试未传消息时使用错误码默认消息"""
        exc = ArsrException()
        assert exc.message == "Internal error"
        assert exc.code == 1000
        assert exc.exit_code == 1

    def test_message_template(self):
        """测试消息模板格式化"""
        exc = ArsrException("frame {index} failed", index=3)
        assert exc.message == "frame 3 failed"

    def test_str_and_dict(self):
        """测试字符串表示与结构化字典"""
        exc = ContractError("bad plan")
        assert str(exc) == "[4001] bad plan"
        result = exc.to_dict()
        assert result["exit_code"] == 4
        assert result["error"]["type"] == "ContractError"
        assert result["error"]["context"]["trace_id"]

    def test_cause_chained(self):
        """测试异常链"""
        cause = OSError("disk full")
        exc = FileAccessError("out.png", "write", cause=cause)
        assert exc.__cause__ is cause


class TestExitCodes:
    """测试异常与退出码的对应关系"""

    @pytest.mark.parametrize(
        "exc, exit_code",
        [
            (ValidationException("bad flag"), ExitCode.USAGE),
            (ParameterInvalidError("chroma"), ExitCode.USAGE),
            (FileAccessError("in.png"), ExitCode.IO),
            (EncoderNotFoundError("ffmpeg"), ExitCode.IO),
            (FormatError("in.y4m", reason="truncated"), ExitCode.FORMAT),
            (VersionMismatchError("w.arsr", "9", [1]), ExitCode.FORMAT),
            (ShapeError("add", expected=(1,), actual=(2,)), ExitCode.CONTRACT),
            (ContractError("downscale"), ExitCode.CONTRACT),
            (DataError("nan"), ExitCode.CONTRACT),
        ],
    )
    def test_exit_code(self, exc, exit_code):
        """测试每类异常的退出码"""
        assert exc.exit_code == exit_code


class TestMessages:
    """测试异常消息"""

    def test_shape_error(self):
        """测试形状错误包含两侧形状"""
        exc = ShapeError("add", expected=(1, 1, 4, 4), actual=(1, 1, 4, 5))
        assert exc.message == "add: shape mismatch, expected (1, 1, 4, 4), got (1, 1, 4, 5)"
        assert exc.expected == (1, 1, 4, 4)

    def test_format_error(self):
        """测试格式错误消息"""
        assert FormatError("a.y4m", reason="bad").message == "Malformed file 'a.y4m': bad"
        assert FormatError().message == "Malformed file"

    def test_version_mismatch_is_format_error(self):
        """测试版本错误继承格式错误"""
        exc = VersionMismatchError("w.arsr", "7", [1])
        assert isinstance(exc, FormatError)
        assert exc.version == "7"
        assert "supported: 1" in exc.message

    def test_value_out_of_range(self):
        """测试越界消息"""
        exc = ValueOutOfRangeError("bits", 2, 16, 20)
        assert exc.message == "Parameter 'bits' value 20 is out of range [2, 16]"
        assert exc.field == "bits"

    def test_encoder_not_found(self):
        """测试编码器缺失消息包含程序名与环境变量"""
        exc = EncoderNotFoundError("ffmpeg")
        assert "ffmpeg" in exc.message
        assert "ARSR_ENCODER" in exc.message
        assert exc.binary == "ffmpeg"


class TestErrorCodeRegistry:
    """测试错误码注册表"""

    def test_standard_codes_registered(self):
        """测试标准错误码已注册"""
        assert ErrorCodeRegistry.get(4000) is StandardErrorCodes.SHAPE_ERROR

    def test_duplicate_rejected(self):
        """测试重复注册"""
        with pytest.raises(ValueError):
            ErrorCodeRegistry.register(ErrorCode(4000, "dup"))

    def test_register_custom(self, monkeypatch):
        """测试注册自定义错误码"""
        monkeypatch.setattr(ErrorCodeRegistry, "_codes", dict(ErrorCodeRegistry._codes))
        code = ErrorCodeRegistry.register(ErrorCode(5001, "Custom", ExitCode.CONTRACT))
        assert ErrorCodeRegistry.get(5001) is code
        assert ArsrException(error_code=code).exit_code == 4

    def test_below_range(self):
        """测试小于 1000 的错误码不能注册"""
        with pytest.raises(ValueError):
            ErrorCodeRegistry.register(ErrorCode(42, "small"))


class TestHandleException:
    """测试统一异常出口"""

    def test_arsr_exception(self):
        """测试工具包异常"""
        exit_code, error = handle_exception(FormatError("x.y4m", reason="bad"))
        assert exit_code == 3
        assert error["message"] == "Malformed file 'x.y4m': bad"

    def test_drf_validation_error(self):
        """测试 DRF 校验异常映射为用法错误"""
        exit_code, error = handle_exception(serializers.ValidationError({"bits": ["too large"]}))
        assert exit_code == 1
        assert error["message"] == "bits: too large"

    def test_unexpected_exception(self):
        """测试未知异常映射为内部错误"""
        exit_code, error = handle_exception(RuntimeError("boom"))
        assert exit_code == 1
        assert error["code"] == 1000
        assert error["message"] == "boom"

    def test_trace_id_passed_through(self):
        """测试调用方传入的 trace_id"""
        _, error = handle_exception(RuntimeError("boom"), trace_id="abc")
        assert error["error"]["context"]["trace_id"] == "abc"

    def test_drf_nested_detail(self):
        """测试嵌套字段的 DRF 错误"""
        _, error = handle_exception(serializers.ValidationError({"model": {"groups": ["not a valid choice"]}}))
        assert error["message"] == "model: groups: not a valid choice"

    def test_validation_fields_in_payload(self):
        """测试校验异常的字段信息进入错误字典"""
        errors = [{"field": "bits", "errors": ["too large"]}]
        _, error = handle_exception(ValidationException("bad", field="bits", errors=errors))
        assert error["error"]["field"] == "bits"
        assert error["error"]["errors"] == errors
        assert "detail" not in error["error"]


class TestTrace:
    """测试 trace 作用域"""

    def test_scope(self):
        """测试作用域内外的 trace_id"""
        assert current_trace_id() is None
        with trace("run-1") as trace_id:
            assert trace_id == "run-1"
            assert ContractError("x").context.trace_id == "run-1"
        assert current_trace_id() is None

    def test_generated(self):
        """测试未指定时生成新的 trace_id"""
        with trace() as first, trace() as second:
            assert first and second and first != second

    def test_worker_threads_share_trace(self):
        """测试线程池中抛出的异常沿用提交方的 trace_id"""

        def fail():
            raise DataError("frame failed")

        with trace("run-2"), ThreadPool(2) as pool:
            future = pool.apply_async(fail)
            with pytest.raises(DataError) as exc_info:
                future.get()
        assert exc_info.value.context.trace_id == "run-2"

    def test_handler_uses_scope(self):
        """测试统一出口使用当前作用域"""
        with trace("run-3"):
            _, error = handle_exception(RuntimeError("boom"))
        assert error["error"]["context"]["trace_id"] == "run-3"

