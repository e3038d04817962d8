"""
性能指标模块

由卷积结果计算各站点的性能指标：队长分布、总/有效/跳过吞吐量、利用率、
平均队长与平均逗留时间。
"""

import logging
from typing import List, Sequence

import numpy as np

from models import NetworkModel, StationReport, VisitRatios
from solver.convolution import GSplit, GTable, compute_g_split, g_complement
from solver.errors import InfeasiblePopulationError, ZeroThroughputError
from solver.network import require_feasible, service_vector
from utils.scaled import ScaledArray, ScaledValue

logger = logging.getLogger(__name__)


def _normalization(gtable: GTable, n: int) -> ScaledValue:
    if n > gtable.population_limit:
        raise ValueError(f"人口数 {n} 超出常数表范围 {gtable.population_limit}")
    value = gtable.normalization(n)
    if value.is_zero:
        support = np.flatnonzero(gtable.final.mantissa)
        raise InfeasiblePopulationError(n, int(support[-1]))
    return value


def _rest(gtable: GTable, gsplit: GSplit, i: int) -> ScaledArray:
    # 末站直接使用 g(·, M-1)
    if i == gtable.stations - 1 and i > 0:
        return gtable.column(i - 1)
    return g_complement(gsplit, i)


def queue_length_distribution(
    gtable: GTable,
    gsplit: GSplit,
    model: NetworkModel,
    visits: VisitRatios,
    i: int,
    n: int
) -> np.ndarray:
    """
    站点 i 的队长分布 p_i(k, n) = f_i(k)·g^[-i](n-k) / g(n, M)

    Args:
        gtable: 归一化常数表
        gsplit: 双向表
        model: 网络模型
        visits: 访问比
        i: 站点下标
        n: 人口数

    Returns:
        np.ndarray: k = 0..min(n, C_i) 的概率

    Raises:
        InfeasiblePopulationError: n > n_max
    """
    require_feasible(model, n)
    total = _normalization(gtable, n)
    limit = min(n, model.stations[i].capacity)
    powers = service_vector(model, visits, i, limit + 1)
    rest = _rest(gtable, gsplit, i)[n - limit:n + 1]
    terms = ScaledArray.normalized(
        powers.mantissa * rest.mantissa[::-1],
        powers.exponent + rest.exponent[::-1]
    )
    return terms.ratio(total)


def total_throughput(gtable: GTable, visits: VisitRatios, i: int, n: int) -> float:
    """
    总吞吐量 X_i(n) = V_i·g(n-1, M) / g(n, M)，n = 0 时为 0

    Raises:
        InfeasiblePopulationError: n > n_max
    """
    if n == 0:
        return 0.0
    total = _normalization(gtable, n)
    return visits.values[i] * gtable.normalization(n - 1).ratio(total)


def skipping_throughput(
    gtable: GTable,
    gsplit: GSplit,
    model: NetworkModel,
    visits: VisitRatios,
    i: int,
    n: int
) -> float:
    """
    跳过吞吐量：n <= C_i 时为 0，否则为 V_i·Y_i^{C_i}·g^[-i](n-1-C_i) / g(n, M)

    Raises:
        InfeasiblePopulationError: n > n_max
    """
    require_feasible(model, n)
    capacity = model.stations[i].capacity
    if n <= capacity:
        return 0.0
    total = _normalization(gtable, n)
    numerator = ScaledValue.power(visits.demands[i], capacity) * _rest(gtable, gsplit, i)[n - 1 - capacity]
    return visits.values[i] * numerator.ratio(total)


def utilization(
    gtable: GTable,
    gsplit: GSplit,
    model: NetworkModel,
    visits: VisitRatios,
    i: int,
    n: int
) -> float:
    """
    利用率：0 < n <= C_i 时为 X_i·S_i，否则为 1 - p_i(0, n)

    p_i(0, n) = g^[-i](n) / g(n, M) 由卷积直接给出，不是补集。

    Raises:
        InfeasiblePopulationError: n > n_max
    """
    require_feasible(model, n)
    if n == 0:
        return 0.0
    station = model.stations[i]
    if n <= station.capacity:
        return total_throughput(gtable, visits, i, n) * station.service_time
    total = _normalization(gtable, n)
    return 1.0 - _rest(gtable, gsplit, i)[n].ratio(total)


def productive_throughput(
    gtable: GTable,
    gsplit: GSplit,
    model: NetworkModel,
    visits: VisitRatios,
    i: int,
    n: int,
    *,
    summation: bool = False
) -> float:
    """
    有效吞吐量 X_i^[P](n)

    默认按 U_i / S_i 计算；summation=True 时使用求和形式
    (V_i / g(n, M))·Σ_{h=0}^{C_i-1} Y_i^h·g^[-i](n-1-h)。
    短路站（S_i = 0）取 X_i - X_i^[S]。

    Args:
        gtable: 归一化常数表
        gsplit: 双向表
        model: 网络模型
        visits: 访问比
        i: 站点下标
        n: 人口数
        summation: 是否使用求和形式

    Returns:
        float: 有效吞吐量

    Raises:
        InfeasiblePopulationError: n > n_max
    """
    require_feasible(model, n)
    if n == 0:
        return 0.0
    station = model.stations[i]
    if not summation:
        if station.service_time == 0:
            return (total_throughput(gtable, visits, i, n)
                    - skipping_throughput(gtable, gsplit, model, visits, i, n))
        return utilization(gtable, gsplit, model, visits, i, n) / station.service_time

    if n <= station.capacity:
        return total_throughput(gtable, visits, i, n)
    total = _normalization(gtable, n)
    rest = _rest(gtable, gsplit, i)
    powers = ScaledArray.powers(visits.demands[i], station.capacity)
    window = rest[n - station.capacity:n]
    terms = ScaledArray.normalized(
        powers.mantissa * window.mantissa[::-1],
        powers.exponent + window.exponent[::-1]
    )
    return visits.values[i] * ScaledValue.sum(terms.values()).ratio(total)


def mean_queue_length(distribution: Sequence[float]) -> float:
    """平均队长 Σ k·p(k)"""
    probabilities = np.asarray(distribution, dtype=np.float64)
    return float(np.dot(np.arange(probabilities.size), probabilities))


def mean_waiting_time(mean_queue_length: float, total_throughput: float) -> float:
    """
    平均逗留时间（Little 公式），包括跳过该站的顾客

    Raises:
        ZeroThroughputError: 吞吐量为 0
    """
    if total_throughput <= 0:
        raise ZeroThroughputError(f"吞吐量为 {total_throughput}，无法计算平均逗留时间")
    return mean_queue_length / total_throughput


def empty_report(i: int) -> StationReport:
    """n = 0 时的报告：所有指标为 0，p_i(0, 0) = 1"""
    return StationReport(
        station=i,
        population=0,
        distribution=(1.0,),
        total_throughput=0.0,
        productive_throughput=0.0,
        skipping_throughput=0.0,
        utilization=0.0,
        mean_queue_length=0.0,
        mean_waiting_time=0.0
    )


def station_report(
    gtable: GTable,
    gsplit: GSplit,
    model: NetworkModel,
    visits: VisitRatios,
    i: int,
    n: int
) -> StationReport:
    """
    汇总站点 i 在人口数 n 下的全部指标

    Returns:
        StationReport: 站点报告
    """
    require_feasible(model, n)
    if n == 0:
        return empty_report(i)
    distribution = queue_length_distribution(gtable, gsplit, model, visits, i, n)
    throughput = total_throughput(gtable, visits, i, n)
    queue_length = mean_queue_length(distribution)
    return StationReport(
        station=i,
        population=n,
        distribution=tuple(float(p) for p in distribution),
        total_throughput=throughput,
        productive_throughput=productive_throughput(gtable, gsplit, model, visits, i, n),
        skipping_throughput=skipping_throughput(gtable, gsplit, model, visits, i, n),
        utilization=utilization(gtable, gsplit, model, visits, i, n),
        mean_queue_length=queue_length,
        mean_waiting_time=mean_waiting_time(queue_length, throughput)
    )


def solve_convolution(
    model: NetworkModel,
    visits: VisitRatios,
    populations: Sequence[int]
) -> List[List[StationReport]]:
    """
    卷积法求解：一次构表，给出每个人口数下所有站点的报告

    Args:
        model: 已校验的模型
        visits: 访问比
        populations: 人口数列表

    Returns:
        list: 与 populations 同序，每项为 M 个站点的报告

    Raises:
        InfeasiblePopulationError: 任一人口数超过 n_max
    """
    populations = list(populations)
    for n in populations:
        require_feasible(model, n)
    limit = max(populations, default=0)
    gsplit = compute_g_split(model, visits, limit)
    gtable = gsplit.up
    logger.info(f"卷积法: M={model.size}, N={limit}, 乘法次数 {gtable.multiplications}")
    return [
        [station_report(gtable, gsplit, model, visits, i, n) for i in range(model.size)]
        for n in populations
    ]
