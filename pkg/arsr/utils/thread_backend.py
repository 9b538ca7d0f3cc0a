"""
继承提交方 contextvars 的线程池

标准库 ThreadPool 的工作线程看不到提交方的 contextvars（例如 trace_id），
这里在提交时复制上下文，任务在该上下文的副本中执行。
"""

import contextvars
from collections.abc import Callable
from functools import partial
from multiprocessing.pool import ThreadPool as _ThreadPool


def run_in_context(ctx: contextvars.Context, func: Callable, *args, **kwargs):
    # Context.run 不可重入，绑定后的函数可能被多次调用，每次另行复制
    return ctx.copy().run(func, *args, **kwargs)


def bind_context(func: Callable) -> Callable:
    return partial(run_in_context, contextvars.copy_context(), func)


class ThreadPool(_ThreadPool):
    def apply_async(self, func, args=(), kwds=None, callback=None, error_callback=None):
        return super().apply_async(bind_context(func), args, kwds or {}, callback, error_callback)

