"""
Django 运行环境引导

arsr 本身不是 Web 应用，但请求校验（DRF Serializer）与配置层（APISettings）
依赖一个已配置的 Django settings。宿主进程已配置时保持不动，否则写入最小配置。
"""

import logging

import django
from django.conf import settings

logger = logging.getLogger(__name__)

# 最小 Django 配置：无数据库、无国际化
DJANGO_DEFAULTS = {
    "DEBUG": False,
    "USE_I18N": False,
    "USE_TZ": True,
    "INSTALLED_APPS": ["rest_framework"],
    "DATABASES": {},
}


def setup_django(**overrides) -> bool:
    """
    按需配置 Django

    :param overrides: 覆盖 DJANGO_DEFAULTS 的配置项，例如 ARSR={...}
    :return: 本次调用是否执行了配置
    """
    if settings.configured:
        return False

    options = dict(DJANGO_DEFAULTS)
    options.update(overrides)
    settings.configure(**options)
    django.setup()
    logger.debug("django configured for arsr with keys: %s", sorted(options))
    return True
