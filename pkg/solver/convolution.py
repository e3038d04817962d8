"""
卷积模块

计算有限容量网络的归一化常数：
- g(n, m)：按站点前缀逐列卷积（三段式递推）
- g_UP / g_DW：前缀与后缀两个方向的表
- g^[-i]：删除站点 i 后的常数，只需一次卷积

所有数值以缩放形式 (尾数, 指数) 存储，避免 Y_i^k 的上溢/下溢。
"""

import logging
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from models import NetworkModel, VisitRatios
from utils.scaled import ScaledArray, ScaledValue, aligned_sum, convolve

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class GTable:
    """
    归一化常数表

    Attributes:
        mantissa: (N+1)×M 尾数
        exponent: (N+1)×M 指数，[n, m] 对应 g(n, m+1)
        population_limit: N
        multiplications: 构表时执行的乘法次数
    """
    mantissa: np.ndarray
    exponent: np.ndarray
    population_limit: int
    multiplications: int = 0

    @property
    def stations(self) -> int:
        return int(self.mantissa.shape[1])

    def column(self, m: int) -> ScaledArray:
        """第 m 列（0 起）"""
        return ScaledArray(self.mantissa[:, m], self.exponent[:, m])

    def value(self, n: int, m: int) -> ScaledValue:
        """g(n, m+1)，n < 0 时为 0"""
        if n < 0 or n > self.population_limit:
            return ScaledValue()
        return ScaledValue(float(self.mantissa[n, m]), int(self.exponent[n, m]))

    def normalization(self, n: int) -> ScaledValue:
        """完整网络的 g(n, M)"""
        return self.value(n, self.stations - 1)

    @property
    def final(self) -> ScaledArray:
        return self.column(self.stations - 1)

    def to_floats(self) -> np.ndarray:
        """转换为 float64 表（可能溢出为 inf，仅用于小模型的测试与调试）"""
        return np.column_stack([self.column(m).to_floats() for m in range(self.stations)])


@dataclass(frozen=True, eq=False)
class GSplit:
    """
    双向归一化常数表

    Attributes:
        up: 前缀表，up.column(m) = g_UP(·, m+1)（站点 1..m+1）
        down: 后缀表，down.column(m) = g_DW(·, m+1)（站点 m+1..M）
        complements: 各站点的 g^[-i](·)，由 compute_g_split 一次算好
    """
    up: GTable
    down: GTable
    complements: Tuple[ScaledArray, ...] = ()

    @property
    def stations(self) -> int:
        return self.up.stations

    @property
    def population_limit(self) -> int:
        return self.up.population_limit


def _fold_station(
    previous: ScaledArray,
    demand: float,
    capacity: int,
    length: int
) -> Tuple[ScaledArray, int]:
    # 0 < n <= c: g(n) = prev(n) + Y·g(n-1)，逐项顺序计算
    # n > c:      g(n) = Σ_{k=0}^{c} Y^k·prev(n-k)，按行向量化
    mantissa = np.zeros(length)
    exponent = np.zeros(length, dtype=np.int64)
    mantissa[0], exponent[0] = previous.mantissa[0], previous.exponent[0]
    multiplications = 0

    y = ScaledValue.from_float(demand)
    head = min(capacity, length - 1)
    current = previous[0]
    for n in range(1, head + 1):
        current = previous[n] + y * current
        mantissa[n], exponent[n] = current.mantissa, current.exponent
        multiplications += 1

    if length - 1 > capacity:
        powers = ScaledArray.powers(demand, capacity + 1)
        rows = np.arange(capacity + 1, length)[:, None]
        source = rows - np.arange(capacity + 1)[None, :]
        tail = aligned_sum(
            powers.mantissa[None, :] * previous.mantissa[source],
            powers.exponent[None, :] + previous.exponent[source],
            axis=1
        )
        mantissa[capacity + 1:] = tail.mantissa
        exponent[capacity + 1:] = tail.exponent
        multiplications += (capacity + 1) * (length - 1 - capacity)

    return ScaledArray(mantissa, exponent), multiplications


def _build_table(model: NetworkModel, visits: VisitRatios, population: int,
                 order) -> GTable:
    length = population + 1
    mantissa = np.zeros((length, model.size))
    exponent = np.zeros((length, model.size), dtype=np.int64)
    previous = ScaledArray.unit(length)
    multiplications = 0
    for m in order:
        column, count = _fold_station(
            previous, visits.demands[m], model.stations[m].capacity, length
        )
        mantissa[:, m] = column.mantissa
        exponent[:, m] = column.exponent
        multiplications += count
        previous = column
    return GTable(mantissa, exponent, population, multiplications)


def compute_g(model: NetworkModel, visits: VisitRatios, population: int) -> GTable:
    """
    计算归一化常数表 g(n, m)，n = 0..N，m = 1..M

    n > n_max 的项为精确的 0，不视为错误。

    Args:
        model: 已校验的模型
        visits: 访问比
        population: 人口数上限 N

    Returns:
        GTable: 归一化常数表

    Examples:
        >>> table = compute_g(net_a, visits, 2)
        >>> table.normalization(2).to_float()
        1.0
    """
    if population < 0:
        raise ValueError(f"人口数必须非负: {population}")
    table = _build_table(model, visits, population, range(model.size))
    logger.info(
        f"归一化常数表 {population + 1}×{model.size} 计算完成，"
        f"乘法次数 {table.multiplications}"
    )
    return table


def compute_g_subtractive(model: NetworkModel, visits: VisitRatios, population: int) -> GTable:
    """
    减法形式的递推：g(n,m) = g(n,m-1) + Y·g(n-1,m) - Y^(c+1)·g(n-1-c,m-1)

    存在相消误差，仅用于测试中的交叉验证。
    """
    if population < 0:
        raise ValueError(f"人口数必须非负: {population}")
    length = population + 1
    mantissa = np.zeros((length, model.size))
    exponent = np.zeros((length, model.size), dtype=np.int64)
    previous = [ScaledValue.one()] + [ScaledValue()] * population
    limit = 0
    for m, station in enumerate(model.stations):
        capacity = station.capacity
        limit += capacity
        y = ScaledValue.from_float(visits.demands[m])
        y_c = ScaledValue.power(visits.demands[m], capacity + 1)
        column = [ScaledValue.one()]
        for n in range(1, length):
            if n > limit:
                value = ScaledValue()
            elif n <= capacity:
                value = previous[n] + y * column[n - 1]
            else:
                value = previous[n] + y * column[n - 1] - y_c * previous[n - 1 - capacity]
            column.append(value)
        for n, value in enumerate(column):
            mantissa[n, m], exponent[n, m] = value.mantissa, value.exponent
        previous = column
    return GTable(mantissa, exponent, population)


def compute_g_split(model: NetworkModel, visits: VisitRatios, population: int) -> GSplit:
    """
    计算双向表 g_UP（自左向右）与 g_DW（自右向左），以及每个站点的 g^[-i]

    Args:
        model: 已校验的模型
        visits: 访问比
        population: 人口数上限 N

    Returns:
        GSplit: 双向表，up.column(M-1) 与 down.column(0) 都等于完整的 g(·, M)
    """
    if population < 0:
        raise ValueError(f"人口数必须非负: {population}")
    up = _build_table(model, visits, population, range(model.size))
    down = _build_table(model, visits, population, range(model.size - 1, -1, -1))
    complements = tuple(
        _complement(up, down, station, population + 1) for station in range(model.size)
    )
    return GSplit(up=up, down=down, complements=complements)


def _support(array: ScaledArray) -> ScaledArray:
    nonzero = np.flatnonzero(array.mantissa)
    if nonzero.size == 0:
        return array[:1]
    return array[:int(nonzero[-1]) + 1]


def _complement(up: GTable, down: GTable, station: int, length: int) -> ScaledArray:
    # 内部站点为 g_UP(·, i-1) 与 g_DW(·, i+1) 的一次卷积；
    # 首站直接取 g_DW(·, 2)，末站直接取 g_UP(·, M-1)
    size = up.stations
    if size == 1:
        return ScaledArray.unit(length)
    if station == 0:
        return down.column(1)
    if station == size - 1:
        return up.column(size - 2)
    return convolve(
        _support(up.column(station - 1)),
        _support(down.column(station + 1)),
        length
    )


def g_complement(split: GSplit, station: int) -> ScaledArray:
    """
    删除站点 i 后网络的归一化常数 g^[-i](n)，n = 0..N

    Args:
        split: 双向表
        station: 站点下标（0 起）

    Returns:
        ScaledArray: 长度 N+1 的向量

    Raises:
        IndexError: 站点下标越界
    """
    if not 0 <= station < len(split.complements):
        raise IndexError(f"站点下标越界: {station}")
    return split.complements[station]
