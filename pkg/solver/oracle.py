"""
枚举 Oracle 模块

穷举可行状态空间，直接按乘积式求归一化常数与边缘分布，作为其它求解器的基准。
只适用于小规模模型。
"""

import logging
from typing import Iterator, List, Optional, Sequence, Tuple

from config import get_config
from models import NetworkModel, OracleResult, StateVector, VisitRatios
from solver.errors import StateSpaceLimitError
from utils.scaled import ScaledValue

logger = logging.getLogger(__name__)


def count_states(capacities: Sequence[int], n: int) -> int:
    """
    可行状态数：Π_i (1 + x + … + x^{C_i}) 中 x^n 的系数

    Args:
        capacities: 容量向量
        n: 人口数

    Returns:
        int: 状态数（n < 0 时为 0）
    """
    if n < 0:
        return 0
    coefficients = [1] + [0] * n
    for capacity in capacities:
        updated = [0] * (n + 1)
        running = 0
        for total in range(n + 1):
            running += coefficients[total]
            if total - capacity - 1 >= 0:
                running -= coefficients[total - capacity - 1]
            updated[total] = running
        coefficients = updated
    return coefficients[n]


def _states(capacities: Tuple[int, ...], n: int, room: Tuple[int, ...]) -> Iterator[Tuple[int, ...]]:
    if not capacities:
        if n == 0:
            yield ()
        return
    head, rest = capacities[0], capacities[1:]
    for k in range(min(head, n), max(0, n - room[0]) - 1, -1):
        for tail in _states(rest, n - k, room[1:]):
            yield (k,) + tail


def enumerate_states(
    capacities: Sequence[int],
    n: int,
    *,
    limit: Optional[int] = None
) -> List[StateVector]:
    """
    按字典序（降序）枚举全部可行状态

    Args:
        capacities: 容量向量
        n: 人口数
        limit: 状态数上限（默认取配置值）

    Returns:
        list: 可行状态；n > Σ C_i 时为空

    Raises:
        StateSpaceLimitError: 状态数超过上限

    Examples:
        >>> [s.counts for s in enumerate_states((1, 1), 1)]
        [(1, 0), (0, 1)]
    """
    if limit is None:
        limit = get_config().solver.oracle_state_limit
    if n < 0:
        raise ValueError(f"人口数必须非负: {n}")
    count = count_states(capacities, n)
    if count > limit:
        raise StateSpaceLimitError(count, limit)

    capacities = tuple(int(c) for c in capacities)
    # room[i]: 站点 i+1.. 的容量之和
    room = tuple(sum(capacities[i + 1:]) for i in range(len(capacities)))
    return [StateVector(counts) for counts in _states(capacities, n, room)]


def direct_solution(
    model: NetworkModel,
    visits: VisitRatios,
    n: int,
    *,
    limit: Optional[int] = None
) -> OracleResult:
    """
    直接求和得到 G 与边缘分布

    Args:
        model: 网络模型
        visits: 访问比
        n: 人口数
        limit: 状态数上限（默认取配置值）

    Returns:
        OracleResult: 枚举结果；n > n_max 时状态为空、G = 0，边缘分布全为 0

    Raises:
        StateSpaceLimitError: 状态数超过上限
    """
    states = enumerate_states(model.capacities, n, limit=limit)
    factors = [
        [ScaledValue.power(visits.demands[i], k) for k in range(station.capacity + 1)]
        for i, station in enumerate(model.stations)
    ]

    weights = []
    partial = [[[] for _ in range(station.capacity + 1)] for station in model.stations]
    for state in states:
        weight = ScaledValue.one()
        for i, k in enumerate(state.counts):
            weight = weight * factors[i][k]
        weights.append(weight)
        for i, k in enumerate(state.counts):
            partial[i][k].append(weight)

    normalization = ScaledValue.sum(weights)
    if normalization.is_zero:
        marginals = tuple(tuple(0.0 for _ in range(s.capacity + 1)) for s in model.stations)
    else:
        marginals = tuple(
            tuple(ScaledValue.sum(bucket).ratio(normalization) for bucket in station_buckets)
            for station_buckets in partial
        )
    logger.debug(f"Oracle: n={n}, 状态数 {len(states)}")
    return OracleResult(
        population=n,
        states=tuple(states),
        weights=tuple(weights),
        normalization=normalization,
        marginals=marginals
    )
