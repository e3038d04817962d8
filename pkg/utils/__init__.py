"""
utils 包

包含缩放浮点运算、模型文件加载、报告输出与测试模型生成等工具模块。

包级别只导出缩放浮点运算；model_loader / report_writer / fixtures 依赖 solver 包，
需要按模块导入，例如 ``from utils.model_loader import load_model``。
"""

from .scaled import ScaledValue, ScaledArray, aligned_sum, convolve, relative_difference

__all__ = [
    'ScaledValue',
    'ScaledArray',
    'aligned_sum',
    'convolve',
    'relative_difference'
]
