"""
arsr - 压缩伪影去除与超分辨率（ARSR）工具包

网络推理与折叠、训练后量化、小规模训练、整帧放大流水线与文件格式。
请求校验与配置基于 Django REST framework，导入时按需配置最小 Django 环境。
"""

from arsr.conf import setup_django

setup_django()

__version__ = "1.0.0"
