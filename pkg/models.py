"""
数据模型模块

定义项目中使用的所有数据模型和类型：网络模型、访问比、各求解器的输出以及报告文档。
所有模型构造后不可变，可以在线程间共享。
"""

from dataclasses import dataclass, field
from datetime import datetime
from enum import Enum
from typing import List, Optional, Dict, Any, Tuple, Union
import json

import numpy as np

from utils.scaled import ScaledValue


class SolverMethod(str, Enum):
    """求解方法枚举"""
    CONVOLUTION = "convolution"
    MVA = "mva"
    STABLE_MVA = "stable-mva"


class OutputFormat(str, Enum):
    """输出格式枚举"""
    TABLE = "table"
    JSON = "json"
    CSV = "csv"


@dataclass(frozen=True)
class StationSpec:
    """
    服务站数据模型

    Attributes:
        name: 站点名称
        capacity: 缓冲区容量 C_i（含正在服务的顾客）
        service_time: 平均服务时间 S_i（指数分布均值）
    """
    name: str
    capacity: int
    service_time: float

    def to_dict(self) -> Dict[str, Any]:
        return {
            'name': self.name,
            'capacity': self.capacity,
            'service_time': self.service_time
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'StationSpec':
        return cls(
            name=data['name'],
            capacity=data['capacity'],
            service_time=data['service_time']
        )


@dataclass(frozen=True)
class RoutingMatrix:
    """
    路由矩阵 Q

    Attributes:
        entries: M×M 概率矩阵，entries[i][j] = q_{i,j}
    """
    entries: Tuple[Tuple[float, ...], ...]

    @classmethod
    def from_rows(cls, rows) -> 'RoutingMatrix':
        """
        从嵌套序列或 numpy 数组创建

        Args:
            rows: 二维序列

        Returns:
            RoutingMatrix: 路由矩阵
        """
        return cls(tuple(tuple(float(q) for q in row) for row in rows))

    @property
    def dimension(self) -> int:
        return len(self.entries)

    def as_array(self) -> np.ndarray:
        """返回 numpy 副本"""
        return np.array(self.entries, dtype=np.float64).reshape(self.dimension, -1)


@dataclass(frozen=True)
class NetworkModel:
    """
    闭合排队网络模型

    Attributes:
        stations: 站点列表（顺序即输入顺序）
        routing: 路由矩阵
        reference: 参考站下标（默认第一个站点）
    """
    stations: Tuple[StationSpec, ...]
    routing: RoutingMatrix
    reference: int = 0

    @property
    def size(self) -> int:
        """站点数 M"""
        return len(self.stations)

    @property
    def names(self) -> Tuple[str, ...]:
        return tuple(s.name for s in self.stations)

    @property
    def capacities(self) -> Tuple[int, ...]:
        return tuple(s.capacity for s in self.stations)

    @property
    def service_times(self) -> Tuple[float, ...]:
        return tuple(s.service_time for s in self.stations)

    def station_index(self, key: Union[str, int]) -> int:
        """
        按名称或下标查找站点

        Args:
            key: 站点名称或从 0 开始的下标

        Returns:
            int: 站点下标

        Raises:
            KeyError: 如果站点不存在
        """
        if isinstance(key, int) and not isinstance(key, bool):
            if 0 <= key < self.size:
                return key
            raise KeyError(f"站点下标越界: {key}")
        for index, station in enumerate(self.stations):
            if station.name == key:
                return index
        raise KeyError(f"站点不存在: {key}")


@dataclass(frozen=True)
class VisitRatios:
    """
    访问比

    Attributes:
        values: 每个站点的访问比 V_i（参考站为 1）
        demands: 服务需求 Y_i = V_i · S_i
    """
    values: Tuple[float, ...]
    demands: Tuple[float, ...]

    def drop(self, station: int) -> 'VisitRatios':
        """删除一个站点的分量（不重新求解）"""
        return VisitRatios(
            values=self.values[:station] + self.values[station + 1:],
            demands=self.demands[:station] + self.demands[station + 1:]
        )


@dataclass(frozen=True)
class StationReport:
    """
    单站点在给定人口数下的性能指标

    Attributes:
        station: 站点下标
        population: 网络人口数 n
        distribution: 队长分布 p_i(k, n)，k = 0..min(n, C_i)
        total_throughput: 总吞吐量 X_i(n)
        productive_throughput: 有效吞吐量 X_i^[P](n)
        skipping_throughput: 跳过吞吐量 X_i^[S](n)
        utilization: 利用率 U_i(n)
        mean_queue_length: 平均队长
        mean_waiting_time: 平均逗留时间（按 Little 公式，含跳过的顾客）
    """
    station: int
    population: int
    distribution: Tuple[float, ...]
    total_throughput: float
    productive_throughput: float
    skipping_throughput: float
    utilization: float
    mean_queue_length: float
    mean_waiting_time: float

    def to_dict(self) -> Dict[str, Any]:
        return {
            'station': self.station,
            'population': self.population,
            'distribution': list(self.distribution),
            'total_throughput': self.total_throughput,
            'productive_throughput': self.productive_throughput,
            'skipping_throughput': self.skipping_throughput,
            'utilization': self.utilization,
            'mean_queue_length': self.mean_queue_length,
            'mean_waiting_time': self.mean_waiting_time
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'StationReport':
        return cls(
            station=data['station'],
            population=data['population'],
            distribution=tuple(data['distribution']),
            total_throughput=data['total_throughput'],
            productive_throughput=data['productive_throughput'],
            skipping_throughput=data['skipping_throughput'],
            utilization=data['utilization'],
            mean_queue_length=data['mean_queue_length'],
            mean_waiting_time=data['mean_waiting_time']
        )


@dataclass(frozen=True)
class MvaState:
    """
    扩展 MVA 在人口数 n 处的状态

    Attributes:
        population: 人口数 n
        distributions: 各站点队长分布 p_i(k, n)，截断到 min(n, C_i)
        waiting_times: 平均逗留时间 w_i(n)
        total_throughputs: X_i(n)
        productive_throughputs: X_i^[P](n)
        skipping_throughputs: X_i^[S](n)
        utilizations: U_i(n)
        mean_queue_lengths: n_i(n)
        stability_flags: 各站点 p_i(0,n) 由补集得到且低于阈值（或出现负分量）
        degraded: 本步或之前任一步出现过稳定性标记
    """
    population: int
    distributions: Tuple[Tuple[float, ...], ...]
    waiting_times: Tuple[float, ...]
    total_throughputs: Tuple[float, ...]
    productive_throughputs: Tuple[float, ...]
    skipping_throughputs: Tuple[float, ...]
    utilizations: Tuple[float, ...]
    mean_queue_lengths: Tuple[float, ...]
    stability_flags: Tuple[bool, ...]
    degraded: bool = False

    @property
    def flagged(self) -> bool:
        return any(self.stability_flags)

    def to_reports(self) -> List[StationReport]:
        """转换为 StationReport 列表"""
        return [
            StationReport(
                station=i,
                population=self.population,
                distribution=self.distributions[i],
                total_throughput=self.total_throughputs[i],
                productive_throughput=self.productive_throughputs[i],
                skipping_throughput=self.skipping_throughputs[i],
                utilization=self.utilizations[i],
                mean_queue_length=self.mean_queue_lengths[i],
                mean_waiting_time=self.waiting_times[i]
            )
            for i in range(len(self.distributions))
        ]


@dataclass(frozen=True)
class FesProfile:
    """
    等效流服务器（FES）：前 station_count 个站点聚合后的负载相关站

    Attributes:
        station_count: 聚合覆盖的站点数 i（站点 1..i）
        visit_ratio: 聚合中最后一个站点的访问比 V_i
        capacity: 聚合容量 C_EQ_i = Σ_{j≤i} C_j（短路站不计入）
        throughputs: X_EQ_i(k)，k = 0..N（k=0 或 k > C_EQ_i 时为 0）
        shorted_throughputs: Y_EQ_i(k) = X_EQ_i(k)·V_{i+1}/V_i（最后一个聚合为空）
    """
    station_count: int
    visit_ratio: float
    capacity: int
    throughputs: Tuple[float, ...]
    shorted_throughputs: Tuple[float, ...] = ()

    def service_function(self, k: int) -> float:
        """
        FES 的服务函数 f_EQ(k) = Π_{h=1}^{k} V_i / X_EQ_i(h)，应等于 g(k, i)

        Args:
            k: 聚合内顾客数

        Returns:
            float: f_EQ(k)（k 超出容量时为 0）
        """
        if k > self.capacity:
            return 0.0
        value = 1.0
        for h in range(1, k + 1):
            value *= self.visit_ratio / self.throughputs[h]
        return value


@dataclass(frozen=True, eq=False)
class CompositeDistributions:
    """
    串联链求解过程中保存的分布历史

    Attributes:
        station_distributions: 第 j 个元素为站点 j 在子网 1..j+1 中的分布矩阵，
            形状 (C_j + 1, N + 1)，[k, n] = p_j(k, n)
        aggregates: 第 i 个元素为聚合 EQ_{i+1} 的分布矩阵，
            形状 (N + 1, N + 1)，[l, n] = p_EQ(l, n)
    """
    station_distributions: Tuple[np.ndarray, ...]
    aggregates: Tuple[np.ndarray, ...]


@dataclass(frozen=True)
class StateVector:
    """
    网络状态

    Attributes:
        counts: 各站点的顾客数 n_i
    """
    counts: Tuple[int, ...]


@dataclass(frozen=True)
class OracleResult:
    """
    枚举 Oracle 的结果

    Attributes:
        population: 人口数 n
        states: 全部可行状态
        weights: 每个状态的非归一化乘积式权重 Π f_i(n_i)
        normalization: 归一化常数 G = Σ weights
        marginals: 各站点边缘分布 p_i(k, n)，k = 0..C_i
    """
    population: int
    states: Tuple[StateVector, ...]
    weights: Tuple[ScaledValue, ...]
    normalization: ScaledValue
    marginals: Tuple[Tuple[float, ...], ...]


@dataclass(frozen=True)
class ModelEcho:
    """
    报告中回显的模型信息

    Attributes:
        names: 站点名称
        capacities: 容量
        service_times: 服务时间
        demands: 服务需求 Y_i
        visit_ratios: 访问比 V_i
        reference: 参考站名称
    """
    names: Tuple[str, ...]
    capacities: Tuple[int, ...]
    service_times: Tuple[float, ...]
    demands: Tuple[float, ...]
    visit_ratios: Tuple[float, ...]
    reference: str

    def to_dict(self) -> Dict[str, Any]:
        return {
            'names': list(self.names),
            'capacities': list(self.capacities),
            'service_times': list(self.service_times),
            'demands': list(self.demands),
            'visit_ratios': list(self.visit_ratios),
            'reference': self.reference
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'ModelEcho':
        return cls(
            names=tuple(data['names']),
            capacities=tuple(data['capacities']),
            service_times=tuple(data['service_times']),
            demands=tuple(data['demands']),
            visit_ratios=tuple(data['visit_ratios']),
            reference=data['reference']
        )


@dataclass(frozen=True)
class PopulationResult:
    """
    单个人口数下所有站点的报告

    Attributes:
        population: 人口数
        stations: 各站点报告
        stability_flags: 触发 MVA 稳定性标记的站点名称
    """
    population: int
    stations: Tuple[StationReport, ...]
    stability_flags: Tuple[str, ...] = ()

    def to_dict(self) -> Dict[str, Any]:
        return {
            'population': self.population,
            'stations': [report.to_dict() for report in self.stations]
        }


@dataclass(frozen=True)
class ReportDocument:
    """
    求解报告文档（符合 report.schema.json）

    Attributes:
        model: 模型回显
        method: 求解方法
        version: 求解器版本
        results: 各人口数的结果
        elapsed_seconds: 求解耗时
        generated_at: 生成时间
    """
    model: ModelEcho
    method: SolverMethod
    version: str
    results: Tuple[PopulationResult, ...]
    elapsed_seconds: float = 0.0
    generated_at: str = field(default_factory=lambda: datetime.now().isoformat())

    def stability_flags(self) -> List[Dict[str, Any]]:
        """仅 MVA 会产生稳定性标记"""
        return [
            {'population': result.population, 'stations': list(result.stability_flags)}
            for result in self.results if result.stability_flags
        ]

    def to_dict(self) -> Dict[str, Any]:
        """
        转换为字典（符合 report.schema.json）

        Returns:
            dict: 字典表示
        """
        return {
            'model': self.model.to_dict(),
            'solver': {'method': self.method.value, 'version': self.version},
            'results': [result.to_dict() for result in self.results],
            'stability_flags': self.stability_flags(),
            'timing': {
                'elapsed_seconds': self.elapsed_seconds,
                'generated_at': self.generated_at
            }
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'ReportDocument':
        """
        从字典创建实例

        Args:
            data: to_dict() 的输出

        Returns:
            ReportDocument: 报告实例
        """
        flags = {entry['population']: tuple(entry['stations'])
                 for entry in data.get('stability_flags', [])}
        results = tuple(
            PopulationResult(
                population=item['population'],
                stations=tuple(StationReport.from_dict(s) for s in item['stations']),
                stability_flags=flags.get(item['population'], ())
            )
            for item in data['results']
        )
        return cls(
            model=ModelEcho.from_dict(data['model']),
            method=SolverMethod(data['solver']['method']),
            version=data['solver']['version'],
            results=results,
            elapsed_seconds=data['timing']['elapsed_seconds'],
            generated_at=data['timing']['generated_at']
        )

    def save_to_file(self, file_path: str) -> None:
        """
        保存到 JSON 文件

        Args:
            file_path: 文件路径
        """
        with open(file_path, 'w', encoding='utf-8') as f:
            json.dump(self.to_dict(), f, ensure_ascii=False, indent=2)

    @classmethod
    def load_from_file(cls, file_path: str) -> 'ReportDocument':
        """
        从 JSON 文件加载

        Args:
            file_path: 文件路径

        Returns:
            ReportDocument: 报告实例
        """
        with open(file_path, 'r', encoding='utf-8') as f:
            data = json.load(f)
        return cls.from_dict(data)
