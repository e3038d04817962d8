"""
扩展 MVA 模块

按人口数 n = 1..N 递推计算逗留时间、吞吐量、完整队长分布与跳过吞吐量。
p_i(0, n) 由补集 1 - U_i(n) 得到，在高负载区可能出现相消，
此时对应站点被标记为不稳定，调用方可以改用 stable-mva。
"""

import logging
from typing import List, Optional

import numpy as np

from config import get_config
from models import MvaState, NetworkModel, StationReport, VisitRatios
from solver.network import require_feasible

logger = logging.getLogger(__name__)


def run_mva(
    model: NetworkModel,
    visits: VisitRatios,
    population: int,
    *,
    simplified: bool = True,
    threshold: Optional[float] = None,
    negative_threshold: Optional[float] = None
) -> List[MvaState]:
    """
    扩展 MVA 递推

    n <= C_i 的站点使用简化形式 w_i(n) = S_i·(1 + n_i(n-1))，
    其余站点使用 w_i(n) = Σ_{k=1}^{L_i} k·S_i·p_i(k-1, n-1)。

    Args:
        model: 已校验的模型
        visits: 访问比
        population: 人口数 N
        simplified: 是否启用简化形式（False 时所有站点都用求和形式）
        threshold: 补集 p_i(0, n) 的不稳定阈值（默认取配置值）
        negative_threshold: 负分量阈值（默认取配置值）

    Returns:
        list: n = 1..N 的 MvaState

    Raises:
        InfeasiblePopulationError: N > n_max

    Examples:
        >>> states = run_mva(net_a, visits, 2)
        >>> states[-1].total_throughputs
        (2.0, 2.0)
    """
    settings = get_config().solver
    if threshold is None:
        threshold = settings.instability_threshold
    if negative_threshold is None:
        negative_threshold = settings.negative_threshold
    require_feasible(model, population)

    size = model.size
    capacities = np.array(model.capacities)
    service = np.array(model.service_times, dtype=np.float64)
    ratios = np.array(visits.values, dtype=np.float64)

    previous = [np.ones(1) for _ in range(size)]
    previous_queue = np.zeros(size)
    degraded = False
    states: List[MvaState] = []

    for n in range(1, population + 1):
        waiting = np.empty(size)
        for i in range(size):
            limit = min(n, capacities[i])
            if simplified and n <= capacities[i]:
                waiting[i] = service[i] * (1.0 + previous_queue[i])
            else:
                k = np.arange(1, limit + 1)
                waiting[i] = service[i] * np.dot(k, previous[i][:limit])

        x_ref = n / np.dot(ratios, waiting)
        throughput = ratios * x_ref
        queue = waiting * throughput

        distributions = []
        utilizations = np.empty(size)
        skipping = np.zeros(size)
        flags = []
        for i in range(size):
            limit = min(n, capacities[i])
            current = np.empty(limit + 1)
            current[1:] = throughput[i] * service[i] * previous[i][:limit]
            utilizations[i] = current[1:].sum()
            current[0] = 1.0 - utilizations[i]
            if n > capacities[i]:
                skipping[i] = throughput[i] * previous[i][capacities[i]]
            flags.append(bool(current[0] < threshold or np.any(current < negative_threshold)))
            distributions.append(current)

        productive = np.where(service > 0, utilizations / np.where(service > 0, service, 1.0),
                              throughput - skipping)
        if any(flags) and not degraded:
            names = [model.stations[i].name for i in range(size) if flags[i]]
            logger.warning(f"MVA 在 n={n} 出现数值不稳定 (站点 {names})，建议改用 stable-mva")
        degraded = degraded or any(flags)

        states.append(MvaState(
            population=n,
            distributions=tuple(tuple(float(p) for p in d) for d in distributions),
            waiting_times=tuple(float(w) for w in waiting),
            total_throughputs=tuple(float(x) for x in throughput),
            productive_throughputs=tuple(float(x) for x in productive),
            skipping_throughputs=tuple(float(x) for x in skipping),
            utilizations=tuple(float(u) for u in utilizations),
            mean_queue_lengths=tuple(float(q) for q in queue),
            stability_flags=tuple(flags),
            degraded=degraded
        ))
        previous = distributions
        previous_queue = queue

    return states


def mva_reports(states: List[MvaState]) -> List[List[StationReport]]:
    """将 MVA 状态序列转换为报告"""
    return [state.to_reports() for state in states]
