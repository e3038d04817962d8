"""
网络模型模块

负责网络模型的校验与预处理：路由矩阵检查、访问比求解、服务函数以及可行人口上限。
"""

import logging
import math
from typing import List, Optional

import networkx as nx
import numpy as np

from config import get_config
from models import NetworkModel, RoutingMatrix, StationSpec, VisitRatios
from solver.errors import (
    BadStationError,
    DimensionMismatchError,
    InfeasiblePopulationError,
    NonStochasticRowError,
    ReducibleRoutingError,
    SingularSystemError,
)
from utils.scaled import ScaledArray

logger = logging.getLogger(__name__)


def _check_station(index: int, station: StationSpec, allow_shorted: bool) -> None:
    if not isinstance(station.name, str) or not station.name:
        raise BadStationError(index, str(station.name), "名称必须是非空字符串")
    capacity = station.capacity
    if isinstance(capacity, bool) or not isinstance(capacity, (int, np.integer)):
        raise BadStationError(index, station.name, f"容量必须是整数，实际为 {capacity!r}")
    if capacity < 1:
        raise BadStationError(index, station.name, f"容量必须 >= 1，实际为 {capacity}")
    service_time = station.service_time
    if isinstance(service_time, bool) or not isinstance(service_time, (int, float, np.floating)):
        raise BadStationError(index, station.name, f"服务时间必须是实数，实际为 {service_time!r}")
    if not math.isfinite(service_time):
        raise BadStationError(index, station.name, "服务时间必须是有限值")
    if service_time < 0 or (service_time == 0 and not allow_shorted):
        raise BadStationError(index, station.name, f"服务时间必须 > 0，实际为 {service_time}")


def _routing_graph(matrix: np.ndarray) -> nx.DiGraph:
    graph = nx.DiGraph()
    graph.add_nodes_from(range(matrix.shape[0]))
    sources, targets = np.nonzero(matrix > 0)
    graph.add_edges_from(zip(sources.tolist(), targets.tolist()))
    return graph


def _outside_main_component(graph: nx.DiGraph) -> List[int]:
    component = next(c for c in nx.strongly_connected_components(graph) if 0 in c)
    return sorted(set(graph.nodes) - component)


def validate_model(
    raw_model: NetworkModel,
    *,
    allow_shorted: bool = False,
    tolerance: Optional[float] = None
) -> NetworkModel:
    """
    校验网络模型并返回规范化后的副本

    行和偏离 1 不超过容差时静默重新归一化该行，否则拒绝。

    Args:
        raw_model: 待校验的模型
        allow_shorted: 是否允许服务时间为 0 的短路站
        tolerance: 行和容差（默认取配置值）

    Returns:
        NetworkModel: 校验通过的模型

    Raises:
        DimensionMismatchError: 站点数与路由矩阵维度不一致
        BadStationError: 容量 < 1 或服务时间 <= 0
        NonStochasticRowError: 行和偏离 1 超过容差或含非法概率
        ReducibleRoutingError: 路由图不是强连通的

    Examples:
        >>> model = validate_model(raw)
        >>> model.size
        2
    """
    if tolerance is None:
        tolerance = get_config().solver.row_sum_tolerance

    size = len(raw_model.stations)
    if size < 1:
        raise DimensionMismatchError("网络至少需要一个站点")

    rows = raw_model.routing.entries
    if len(rows) != size or any(len(row) != size for row in rows):
        raise DimensionMismatchError(
            f"站点数 M={size} 与路由矩阵维度不一致 "
            f"({len(rows)}×{[len(row) for row in rows]})"
        )

    names = set()
    for index, station in enumerate(raw_model.stations):
        _check_station(index, station, allow_shorted)
        if station.name in names:
            raise BadStationError(index, station.name, "站点名称重复")
        names.add(station.name)

    if not 0 <= raw_model.reference < size:
        raise DimensionMismatchError(f"参考站下标 {raw_model.reference} 超出范围 0..{size - 1}")

    matrix = np.array(rows, dtype=np.float64).reshape(size, size)
    for row in range(size):
        values = matrix[row]
        if not np.all(np.isfinite(values)) or np.any(values < 0) or np.any(values > 1):
            raise NonStochasticRowError(
                row, float(np.sum(values)), tolerance, detail="概率必须位于 [0, 1]"
            )
        row_sum = math.fsum(values)
        if abs(row_sum - 1.0) > tolerance:
            raise NonStochasticRowError(row, row_sum, tolerance)
        if row_sum != 1.0:
            logger.warning(f"路由矩阵第 {row} 行重新归一化 (行和 {row_sum!r})")
            matrix[row] = values / row_sum

    unreachable = _outside_main_component(_routing_graph(matrix))
    if unreachable:
        raise ReducibleRoutingError(unreachable)

    return NetworkModel(
        stations=tuple(raw_model.stations),
        routing=RoutingMatrix.from_rows(matrix),
        reference=raw_model.reference
    )


def solve_visit_ratios(model: NetworkModel, *, residual: Optional[float] = None) -> VisitRatios:
    """
    求解访问比 V = V·Q，参考站 V_ref = 1

    秩为 M-1 的平衡方程组中，用归一化约束 V_ref = 1 替换参考站对应的方程，
    再以部分主元 LU 分解求解满秩系统。

    Args:
        model: 已校验的模型
        residual: 允许的相对残差（默认取配置值）

    Returns:
        VisitRatios: 访问比与服务需求

    Raises:
        SingularSystemError: 方程组数值奇异或残差超限
    """
    if residual is None:
        residual = get_config().solver.visit_residual

    q = model.routing.as_array()
    size = model.size
    ref = model.reference

    system = q.T - np.eye(size)
    system[ref, :] = 0.0
    system[ref, ref] = 1.0
    rhs = np.zeros(size)
    rhs[ref] = 1.0

    try:
        values = np.linalg.solve(system, rhs)
    except np.linalg.LinAlgError as e:
        raise SingularSystemError(f"访问比方程组奇异: {e}") from e

    values[ref] = 1.0
    error = float(np.max(np.abs(values - values @ q)))
    scale = float(np.max(np.abs(values)))
    if not np.all(np.isfinite(values)) or error > residual * scale:
        raise SingularSystemError(f"访问比残差 {error:.3e} 超过上限 {residual:g}·max(V)")
    if np.any(values <= 0):
        raise SingularSystemError(f"访问比出现非正分量: {values.tolist()}")

    demands = values * np.array(model.service_times, dtype=np.float64)
    logger.debug(f"访问比: {values.tolist()}")
    return VisitRatios(
        values=tuple(float(v) for v in values),
        demands=tuple(float(y) for y in demands)
    )


def service_function(model: NetworkModel, visits: VisitRatios, i: int, k: int) -> float:
    """
    站点服务函数 f_i(k)

    Args:
        model: 网络模型
        visits: 访问比
        i: 站点下标
        k: 顾客数

    Returns:
        float: k=0 时为 1，0 < k <= C_i 时为 Y_i^k，否则为 0（超出 float 范围时为 inf）
    """
    if k < 0:
        raise ValueError(f"顾客数必须非负: {k}")
    if k == 0:
        return 1.0
    if k > model.stations[i].capacity:
        return 0.0
    try:
        return math.pow(visits.demands[i], k)
    except OverflowError:
        return math.inf


def service_vector(model: NetworkModel, visits: VisitRatios, i: int, length: int) -> ScaledArray:
    """
    以缩放形式返回 f_i(0..length-1)

    Args:
        model: 网络模型
        visits: 访问比
        i: 站点下标
        length: 向量长度

    Returns:
        ScaledArray: 服务函数向量，超出容量的分量为 0
    """
    capacity = model.stations[i].capacity
    powers = ScaledArray.powers(visits.demands[i], min(capacity + 1, length))
    vector = ScaledArray.zeros(length)
    vector.mantissa[:len(powers)] = powers.mantissa
    vector.exponent[:len(powers)] = powers.exponent
    return vector


def effective_capacity(station: StationSpec) -> int:
    """服务函数支撑集的上界：短路站 f(k>0)=0，不容纳顾客"""
    return station.capacity if station.service_time > 0 else 0


def n_max(model: NetworkModel) -> int:
    """可行人口上限 Σ C_i（短路站不计入）"""
    return sum(effective_capacity(station) for station in model.stations)


def require_feasible(model: NetworkModel, population: int) -> None:
    """
    检查人口数是否可行

    Raises:
        ValueError: 人口数为负
        InfeasiblePopulationError: 人口数超过 n_max
    """
    if population < 0:
        raise ValueError(f"人口数必须非负: {population}")
    limit = n_max(model)
    if population > limit:
        raise InfeasiblePopulationError(population, limit, list(model.capacities))


def extend_with_shorted_station(
    model: NetworkModel,
    after: int,
    capacity: int,
    name: Optional[str] = None
) -> NetworkModel:
    """
    在站点 after 之后串入一个服务时间为 0 的短路站

    站点 after 的全部输出先流向新站，新站再按 after 原来的路由行转发，
    因此原站点的访问比不变，新站的访问比等于 V_after。

    Args:
        model: 已校验的模型
        after: 被截流的站点下标
        capacity: 新站容量（服务函数在 k>0 时为 0，不影响归一化常数与 n_max）
        name: 新站名称（默认 "<after>-shorted"）

    Returns:
        NetworkModel: M+1 个站点的已校验模型
    """
    size = model.size
    q = model.routing.as_array()
    extended = np.zeros((size + 1, size + 1))
    extended[:size, :size] = q
    extended[after, :] = 0.0
    extended[after, size] = 1.0
    extended[size, :size] = q[after]

    station = StationSpec(
        name=name or f"{model.stations[after].name}-shorted",
        capacity=capacity,
        service_time=0.0
    )
    raw = NetworkModel(
        stations=tuple(model.stations) + (station,),
        routing=RoutingMatrix.from_rows(extended),
        reference=model.reference
    )
    return validate_model(raw, allow_shorted=True)
