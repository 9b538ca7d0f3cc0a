"""
网络核心：张量算子、ARSR 模型、量化、训练
"""
