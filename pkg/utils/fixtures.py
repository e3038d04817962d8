"""
测试模型生成模块

用 numpy 的随机数生成器构造可复现的随机不可约网络，供 generate 命令与测试语料使用。
"""

from typing import Iterator, Optional, Tuple, Union

import numpy as np

from models import NetworkModel, RoutingMatrix, StationSpec
from solver.network import validate_model


def random_routing(rng: np.random.Generator, size: int, density: float = 0.5) -> np.ndarray:
    """
    随机不可约路由矩阵

    先放一个随机排列构成的环保证强连通，再以 density 的概率添加额外的边，
    每行权重取均匀随机数后归一化。

    Args:
        rng: 随机数生成器
        size: 站点数
        density: 额外边的概率

    Returns:
        np.ndarray: size×size 行随机矩阵
    """
    if size == 1:
        return np.ones((1, 1))
    order = rng.permutation(size)
    mask = rng.random((size, size)) < density
    for position in range(size):
        mask[order[position], order[(position + 1) % size]] = True
    weights = np.where(mask, rng.random((size, size)) + 0.05, 0.0)
    return weights / weights.sum(axis=1, keepdims=True)


def random_model(
    seed: Union[int, np.random.Generator, None] = None,
    stations: int = 3,
    max_capacity: int = 4,
    service_range: Tuple[float, float] = (0.1, 10.0)
) -> NetworkModel:
    """
    生成随机网络模型

    Args:
        seed: 随机种子或生成器
        stations: 站点数 M
        max_capacity: 容量上限（容量在 1..max_capacity 中均匀选取）
        service_range: 服务时间范围（对数均匀分布）

    Returns:
        NetworkModel: 已校验的模型

    Examples:
        >>> model = random_model(7, stations=2)
        >>> model.size
        2
    """
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    low, high = service_range
    capacities = rng.integers(1, max_capacity + 1, size=stations)
    service_times = np.exp(rng.uniform(np.log(low), np.log(high), size=stations))
    routing = random_routing(rng, stations)
    raw = NetworkModel(
        stations=tuple(
            StationSpec(name=f"s{i + 1}", capacity=int(c), service_time=float(s))
            for i, (c, s) in enumerate(zip(capacities, service_times))
        ),
        routing=RoutingMatrix.from_rows(routing)
    )
    return validate_model(raw)


def model_corpus(
    seed: int,
    count: int,
    min_stations: int = 2,
    max_stations: int = 4,
    max_capacity: int = 4
) -> Iterator[NetworkModel]:
    """
    可复现的随机模型序列

    Args:
        seed: 随机种子
        count: 模型数
        min_stations: 站点数下限
        max_stations: 站点数上限
        max_capacity: 容量上限

    Yields:
        NetworkModel: 已校验的模型
    """
    rng = np.random.default_rng(seed)
    for _ in range(count):
        stations = int(rng.integers(min_stations, max_stations + 1))
        yield random_model(rng, stations=stations, max_capacity=max_capacity)


def cyclic_model(
    capacities,
    service_times,
    names: Optional[list] = None
) -> NetworkModel:
    """
    串联环网络：站点 i 的顾客全部去往站点 i+1

    Args:
        capacities: 容量
        service_times: 服务时间
        names: 站点名称（默认 s1, s2, ...）

    Returns:
        NetworkModel: 已校验的模型
    """
    size = len(capacities)
    names = names or [f"s{i + 1}" for i in range(size)]
    routing = np.roll(np.eye(size), 1, axis=1)
    raw = NetworkModel(
        stations=tuple(
            StationSpec(name=name, capacity=int(c), service_time=float(s))
            for name, c, s in zip(names, capacities, service_times)
        ),
        routing=RoutingMatrix.from_rows(routing)
    )
    return validate_model(raw)
