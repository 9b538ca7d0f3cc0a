"""
Resource：一次操作 = 声明式请求校验 + perform_request + 可选的返回值校验

命令行每个子命令对应一个 Resource，库调用方直接使用同一套 Resource：

```python
from arsr.resources import InfoResource

info = InfoResource().request({"weights": "x4.arsr"})
```

同一 Resource 的多次独立请求（例如 Y4M 的逐帧放大）可用 bulk_request 在线程池中并发执行，
结果顺序与输入一致。
"""

from __future__ import annotations

import abc
import logging
from typing import Any

from rest_framework.serializers import Serializer

from arsr.exceptions import ValidationException
from arsr.utils.thread_backend import ThreadPool
from arsr.utils.tools import format_serializer_errors, serializer_error_list

logger = logging.getLogger(__name__)


class Resource(abc.ABC):
    RequestSerializer: type[Serializer] | None = None
    ResponseSerializer: type[Serializer] | None = None

    def __init__(self, **context: Any) -> None:
        # Resource(context={...}) 与 Resource(key=value) 等价
        self.context: dict[str, Any] = context.get("context", context)

    @property
    def name(self) -> str:
        return type(self).__name__

    @abc.abstractmethod
    def perform_request(self, validated_request_data: Any) -> Any:
        raise NotImplementedError

    def _validated(self, serializer_class: type[Serializer] | None, data: Any, kind: str) -> Any:
        if serializer_class is None:
            return data
        serializer = serializer_class(data=data)
        if serializer.is_valid():
            return serializer.validated_data

        errors = serializer_error_list(serializer)
        raise ValidationException(
            f"{self.name}: invalid {kind}: {format_serializer_errors(serializer)}",
            field=errors[0]["field"] if len(errors) == 1 else None,
            errors=errors,
        )

    def request(self, request_data: dict | None = None, **kwargs: Any) -> Any:
        """
        :raises ValidationException: 请求数据不合法（退出码 1）
        """
        validated = self._validated(self.RequestSerializer, request_data or kwargs, "request")
        return self._validated(self.ResponseSerializer, self.perform_request(validated), "response")

    def bulk_request(
        self,
        requests: list[Any] | tuple[Any, ...],
        ignore_exceptions: bool = False,
        processes: int | None = None,
    ) -> list[Any]:
        """
        :param ignore_exceptions: 失败的请求以 None 占位；全部失败时仍抛出第一个异常
        :param processes: 线程数，默认 WORKER_THREADS
        """
        from arsr.settings import arsr_settings

        if not isinstance(requests, list | tuple):
            raise TypeError(f"bulk_request expects a list or tuple, got {type(requests).__name__}")
        if not requests:
            return []

        with ThreadPool(processes or arsr_settings.WORKER_THREADS) as pool:
            futures = [pool.apply_async(self.request, (data,)) for data in requests]
            outcomes = []
            for future in futures:
                try:
                    outcomes.append(future.get())
                except Exception as exc:
                    if not ignore_exceptions:
                        raise
                    outcomes.append(exc)

        failures = [o for o in outcomes if isinstance(o, Exception)]
        if failures and len(failures) == len(outcomes):
            raise failures[0]
        if failures:
            logger.warning("%s: %s of %s requests failed", self.name, len(failures), len(outcomes))
        return [None if isinstance(o, Exception) else o for o in outcomes]
