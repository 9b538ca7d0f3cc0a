import contextvars

from rest_framework import serializers

from arsr.utils.thread_backend import ThreadPool, run_in_context
from arsr.utils.tools import format_serializer_errors, serializer_error_list

trace_var = contextvars.ContextVar("trace_var", default=None)


class _Sample(serializers.Serializer):
    bits = serializers.IntegerField(min_value=2)
    method = serializers.ChoiceField(choices=("nearest", "bilinear"))


class TestThreadPool:
    """测试上下文继承的线程池"""

    def test_context_propagates(self):
        """测试子线程读到提交时的 contextvars"""
        token = trace_var.set("trace-1")
        try:
            pool = ThreadPool(2)
            results = [pool.apply_async(trace_var.get) for _ in range(4)]
            pool.close()
            pool.join()
            assert [r.get() for r in results] == ["trace-1"] * 4
        finally:
            trace_var.reset(token)

    def test_run_with_copied_context(self):
        """测试在上下文副本中执行，不污染原上下文"""
        ctx = contextvars.copy_context()

        def mutate():
            trace_var.set("inner")
            return trace_var.get()

        assert run_in_context(ctx, mutate) == "inner"
        assert ctx.get(trace_var) is None


class TestSerializerErrors:
    """测试序列化器错误格式化"""

    def test_format(self):
        """测试每个出错字段一条消息"""
        serializer = _Sample(data={"bits": 1, "method": "spline"})
        assert not serializer.is_valid()
        text = format_serializer_errors(serializer)
        assert "(bits)" in text
        assert "(method)" in text
        assert "; " in text

    def test_error_list(self):
        """测试结构化错误列表"""
        serializer = _Sample(data={"method": "nearest"})
        assert not serializer.is_valid()
        errors = serializer_error_list(serializer)
        assert errors == [{"field": "bits", "errors": ["This field is required."]}]

