"""
异常定义模块

求解器各阶段抛出的异常。模型校验类异常同时继承 ValueError，
便于调用方沿用 ``except ValueError`` 的写法。
"""

from typing import Optional


class SkipNetError(Exception):
    """所有求解器异常的基类"""


class ModelValidationError(SkipNetError, ValueError):
    """网络模型不满足结构约束"""


class NonStochasticRowError(ModelValidationError):
    """路由矩阵某行之和偏离 1 超过容差"""

    def __init__(self, row: int, row_sum: float, tolerance: float, detail: str = ""):
        self.row = row
        self.row_sum = row_sum
        reason = detail or f"行和为 {row_sum!r}，偏离 1 超过容差 {tolerance:g}"
        super().__init__(f"路由矩阵第 {row} 行不满足行随机性约束: {reason}")


class ReducibleRoutingError(ModelValidationError):
    """路由图不是强连通的"""

    def __init__(self, unreachable: list):
        self.unreachable = unreachable
        super().__init__(
            f"路由矩阵不可约性约束不满足：站点 {unreachable} 与其余站点不强连通"
        )


class BadStationError(ModelValidationError):
    """站点容量或服务时间无效"""

    def __init__(self, station: int, name: str, reason: str):
        self.station = station
        self.name = name
        super().__init__(f"站点 {station} ('{name}') 无效: {reason}")


class DimensionMismatchError(ModelValidationError):
    """站点数与路由矩阵维度不一致"""


class SingularSystemError(SkipNetError, ArithmeticError):
    """访问比方程组数值奇异（可约矩阵已被拒绝，出现即说明数值崩溃）"""


class InfeasiblePopulationError(SkipNetError, ValueError):
    """人口数超出容量总和 n_max"""

    def __init__(self, population: int, n_max: int, capacities: Optional[list] = None):
        self.population = population
        self.n_max = n_max
        detail = f" = Σ{capacities}" if capacities is not None else ""
        super().__init__(
            f"人口数 N={population} 不可行: 超出容量总和 n_max{detail} = {n_max}"
        )


class ZeroThroughputError(SkipNetError, ZeroDivisionError):
    """吞吐量为 0 时无法使用 Little 公式"""


class StateSpaceLimitError(SkipNetError):
    """Oracle 状态空间超出配置上限"""

    def __init__(self, count: int, limit: int):
        self.count = count
        self.limit = limit
        super().__init__(f"状态空间包含 {count} 个状态，超出上限 {limit}")
