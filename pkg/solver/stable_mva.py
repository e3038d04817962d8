"""
稳定 MVA 模块

把网络看成一串两站串联模型：前 i 个站点聚合成等效流服务器 (FES)，
与第 i+1 个站点组成串联网络求解，再把结果聚合成下一个 FES。
空队列概率用除法递推得到，整个分布计算不做减法，因此在高负载区依然稳定。
求解完成后把聚合分布反向传播到每个站点，得到完整网络中的边缘分布。
"""

import logging
from typing import List, Optional, Sequence, Tuple

import numpy as np

from models import CompositeDistributions, FesProfile, NetworkModel, StationReport, VisitRatios
from solver.convolution import GSplit, GTable, compute_g_split, g_complement
from solver.errors import BadStationError
from solver.metrics import empty_report
from solver.network import effective_capacity, require_feasible
from utils.scaled import ScaledArray, ScaledValue

logger = logging.getLogger(__name__)


def stable_qld_step(
    throughput: float,
    service_time: float,
    shorted: Sequence[float],
    previous: Sequence[float],
    n: int,
    capacity: int
) -> np.ndarray:
    """
    单步队长分布更新（无减法）

    p(0, n) = X(n)·p(0, n-1) / Y_shorted(n)，其余站点容纳不下 n 个顾客时为 0；
    p(k, n) = X(n)·S·p(k-1, n-1)，1 <= k <= min(n, C)。

    Args:
        throughput: 本站吞吐量 X(n)
        service_time: 本站服务时间 S
        shorted: 短路本站后其余网络的吞吐量 Y_shorted(k)
        previous: p(·, n-1)
        n: 人口数
        capacity: 本站容量 C

    Returns:
        np.ndarray: p(k, n)，k = 0..min(n, C)
    """
    limit = min(n, capacity)
    previous = np.asarray(previous, dtype=np.float64)
    current = np.zeros(limit + 1)
    if n < len(shorted) and shorted[n] > 0:
        current[0] = throughput * previous[0] / shorted[n]
    current[1:] = throughput * service_time * previous[:limit]
    return current


def solve_tandem_chain(
    model: NetworkModel,
    visits: VisitRatios,
    population: int
) -> Tuple[List[FesProfile], CompositeDistributions]:
    """
    依次求解 FES_i + 站点 i+1 的串联网络

    短路站（服务时间为 0）按服务函数 f(0)=1、f(k>0)=0 处理：
    不增加子网容量，队长恒为 0。

    Args:
        model: 已校验的模型
        visits: 访问比
        population: 人口数 N

    Returns:
        tuple: (FesProfile 列表（最后一项覆盖全部站点）, 分布历史)

    Raises:
        InfeasiblePopulationError: N > n_max
    """
    require_feasible(model, population)
    length = population + 1
    ratios = visits.values

    first = model.stations[0]
    capacity = effective_capacity(first)
    throughputs = np.zeros(length)
    if capacity > 0:
        throughputs[1:min(capacity, population) + 1] = 1.0 / first.service_time
    initial = np.zeros((first.capacity + 1, length))
    for n in range(min(capacity, population) + 1):
        initial[n, n] = 1.0

    station_matrices = [initial]
    aggregates = []
    profiles = []

    for s in range(1, model.size):
        station = model.stations[s]
        station_capacity = effective_capacity(station)
        shorted = throughputs * ratios[s] / ratios[s - 1]
        profiles.append(FesProfile(
            station_count=s,
            visit_ratio=ratios[s - 1],
            capacity=capacity,
            throughputs=tuple(float(x) for x in throughputs),
            shorted_throughputs=tuple(float(y) for y in shorted)
        ))

        matrix = np.zeros((station.capacity + 1, length))
        matrix[0, 0] = 1.0
        chain_capacity = capacity + station_capacity
        chain_throughputs = np.zeros(length)
        for n in range(1, min(population, chain_capacity) + 1):
            previous = matrix[:, n - 1]
            k = np.arange(max(1, n - station_capacity), min(n, capacity) + 1)
            w_eq = float(np.sum(k * previous[n - k] / shorted[k]))
            limit = min(n, station_capacity)
            w_station = station.service_time * float(np.dot(np.arange(1, limit + 1), previous[:limit]))
            x = n / (w_eq + w_station)
            chain_throughputs[n] = x
            current = stable_qld_step(
                x, station.service_time, shorted,
                previous[:min(n - 1, station_capacity) + 1], n, station_capacity
            )
            matrix[:current.size, n] = current

        # p_EQ(l, n) = p_{s}(n - l, n)
        aggregate = np.zeros((length, length))
        for n in range(length):
            for j in range(min(n, station_capacity) + 1):
                aggregate[n - j, n] = matrix[j, n]

        station_matrices.append(matrix)
        aggregates.append(aggregate)
        throughputs = chain_throughputs
        capacity = chain_capacity
        logger.debug(f"串联链第 {s} 步完成: C_EQ={capacity}")

    profiles.append(FesProfile(
        station_count=model.size,
        visit_ratio=ratios[-1],
        capacity=capacity,
        throughputs=tuple(float(x) for x in throughputs)
    ))
    return profiles, CompositeDistributions(tuple(station_matrices), tuple(aggregates))


def back_propagate(composites: CompositeDistributions) -> Tuple[np.ndarray, ...]:
    """
    把各站点在子网中的分布按聚合分布加权，得到完整网络中的分布

    p_j^[i](k, n) = Σ_l p_j^[i-1](k, l)·p_EQ_{i-1}(l, n)

    Args:
        composites: solve_tandem_chain 给出的分布历史

    Returns:
        tuple: 每个站点一个 (C_j+1)×(N+1) 矩阵，[k, n] = p_j(k, n)
    """
    result = []
    for j, matrix in enumerate(composites.station_distributions):
        current = matrix
        for aggregate in composites.aggregates[j:]:
            current = current @ aggregate
        result.append(current)
    return tuple(result)


def final_indices(
    distributions: Sequence[np.ndarray],
    throughputs: Sequence[float],
    model: NetworkModel,
    visits: VisitRatios,
    population: int
) -> List[StationReport]:
    """
    由反向传播后的分布与末站吞吐量计算全部指标

    X_i(n) = X_M(n)·V_i/V_M；利用率取 Σ_{k>=1} p_i(k, n)，不做补集减法。

    Args:
        distributions: back_propagate 的输出
        throughputs: 末站吞吐量 X_M(n)，n = 0..N
        model: 网络模型
        visits: 访问比
        population: 人口数 n

    Returns:
        list: 各站点报告
    """
    if population == 0:
        return [empty_report(i) for i in range(model.size)]

    n = population
    scale = throughputs[n] / visits.values[-1]
    reports = []
    for i, station in enumerate(model.stations):
        matrix = distributions[i]
        capacity = station.capacity
        limit = min(n, capacity)
        current = matrix[:limit + 1, n]
        previous = matrix[:, n - 1]
        x = scale * visits.values[i]
        waiting = station.service_time * float(np.dot(np.arange(1, limit + 1), previous[:limit]))
        skipping = x * float(previous[capacity]) if n > capacity else 0.0
        busy = float(current[1:].sum())
        if station.service_time > 0:
            productive = busy / station.service_time
        else:
            productive = x - skipping
        reports.append(StationReport(
            station=i,
            population=n,
            distribution=tuple(float(p) for p in current),
            total_throughput=x,
            productive_throughput=productive,
            skipping_throughput=skipping,
            utilization=busy,
            mean_queue_length=waiting * x,
            mean_waiting_time=waiting
        ))
    return reports


def solve_stable(
    model: NetworkModel,
    visits: VisitRatios,
    populations: Sequence[int]
) -> List[List[StationReport]]:
    """
    稳定 MVA 求解：一次串联链递推覆盖 0..max(populations)

    Args:
        model: 已校验的模型
        visits: 访问比
        populations: 人口数列表

    Returns:
        list: 与 populations 同序，每项为 M 个站点的报告
    """
    populations = list(populations)
    for n in populations:
        require_feasible(model, n)
    limit = max(populations, default=0)
    profiles, composites = solve_tandem_chain(model, visits, limit)
    distributions = back_propagate(composites)
    throughputs = profiles[-1].throughputs
    logger.info(f"稳定 MVA: M={model.size}, N={limit}")
    return [final_indices(distributions, throughputs, model, visits, n) for n in populations]


def fes_from_gtable(
    gtable: GTable,
    model: NetworkModel,
    visits: VisitRatios,
    station_count: int
) -> FesProfile:
    """
    由归一化常数表构造前 station_count 个站点的 FES

    X_EQ(k) = V_i·g(k-1, i) / g(k, i)，1 <= k <= min(C_EQ, N)。

    Args:
        gtable: 归一化常数表
        model: 网络模型
        visits: 访问比
        station_count: 聚合的站点数 i

    Returns:
        FesProfile: 等效流服务器
    """
    i = station_count
    column = gtable.column(i - 1)
    capacity = sum(effective_capacity(station) for station in model.stations[:i])
    length = gtable.population_limit + 1
    ratio = visits.values[i - 1]
    throughputs = np.zeros(length)
    top = min(capacity, gtable.population_limit)
    if top >= 1:
        throughputs[1:top + 1] = ratio * column[:top].ratio(column[1:top + 1])
    shorted = ()
    if i < model.size:
        shorted = tuple(float(x) for x in throughputs * visits.values[i] / ratio)
    return FesProfile(
        station_count=i,
        visit_ratio=ratio,
        capacity=capacity,
        throughputs=tuple(float(x) for x in throughputs),
        shorted_throughputs=shorted
    )


def _combine(service: ScaledArray, rest: ScaledArray, n: int) -> ScaledValue:
    top = min(n, len(service) - 1)
    window = rest[n - top:n + 1]
    terms = ScaledArray.normalized(
        service.mantissa[:top + 1] * window.mantissa[::-1],
        service.exponent[:top + 1] + window.exponent[::-1]
    )
    return ScaledValue.sum(terms.values())


def service_time_sensitivity(
    model: NetworkModel,
    visits: VisitRatios,
    station: int,
    service_times: Sequence[float],
    population: int,
    gsplit: Optional[GSplit] = None
) -> List[float]:
    """
    改变单个站点服务时间时该站的总吞吐量

    其余站点聚合为服务函数 g^[-i](·) 的 FES，每个候选服务时间只需一次
    O(N·C_i) 的卷积，不必重新求解整个网络。

    Args:
        model: 已校验的模型
        visits: 访问比
        station: 站点下标
        service_times: 候选服务时间（均需 > 0）
        population: 人口数 n
        gsplit: 已有的双向表（可选）

    Returns:
        list: 与 service_times 同序的 X_i(n)
    """
    require_feasible(model, population)
    if population < 1:
        raise ValueError("人口数必须 >= 1")
    if gsplit is None or gsplit.population_limit < population:
        gsplit = compute_g_split(model, visits, population)
    rest = g_complement(gsplit, station)
    capacity = model.stations[station].capacity
    ratio = visits.values[station]

    results = []
    for service_time in service_times:
        if not service_time > 0:
            raise BadStationError(station, model.stations[station].name,
                                  f"候选服务时间必须 > 0，实际为 {service_time}")
        powers = ScaledArray.powers(ratio * service_time, capacity + 1)
        current = _combine(powers, rest, population)
        previous = _combine(powers, rest, population - 1)
        results.append(ratio * previous.ratio(current))
    return results
