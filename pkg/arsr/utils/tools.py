"""
DRF 序列化器错误的文本化
"""

import logging
from typing import Any

from rest_framework import serializers

logger = logging.getLogger(__name__)


def _reasons(value: Any) -> str:
    items = value if isinstance(value, list | tuple) else [value]
    return " ".join(str(item) for item in items)


def _flatten(errors: dict, fields: dict, prefix: str = "") -> list[str]:
    messages = []
    for key, value in errors.items():
        name = f"{prefix}{key}"
        field = fields.get(key)
        if isinstance(value, dict):
            # 嵌套序列化器或 ListField(child=Serializer)
            nested = getattr(getattr(field, "child", field), "fields", {})
            messages.extend(_flatten(value, nested, prefix=f"{name}."))
        else:
            messages.append(f"({name}) {_reasons(value)}")
    return messages


def format_serializer_errors(serializer: serializers.Serializer) -> str:
    """每个出错字段一条 "(字段) 原因"，以 "; " 连接；嵌套字段写成 (外层.内层)"""
    try:
        return "; ".join(_flatten(serializer.errors, serializer.fields))
    except Exception as exc:
        logger.warning("failed to format serializer errors: %s", exc)
        return str(serializer.errors)


def serializer_error_list(serializer: serializers.Serializer) -> list[dict]:
    """[{"field": ..., "errors": [...]}]，供 ValidationException.errors 使用"""
    return [
        {"field": key, "errors": [str(e) for e in value] if isinstance(value, list) else value}
        for key, value in serializer.errors.items()
    ]
