"""
交叉验证模块

在同一模型上运行卷积、MVA、稳定 MVA 与枚举 Oracle，统计各指标族的最大偏差。
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

from config import get_config
from models import NetworkModel, StationReport, VisitRatios
from solver.convolution import compute_g
from solver.metrics import solve_convolution
from solver.mva import run_mva
from solver.network import require_feasible
from solver.oracle import count_states, direct_solution
from solver.errors import StateSpaceLimitError
from solver.stable_mva import solve_stable
from utils.scaled import relative_difference

logger = logging.getLogger(__name__)

# 以相对偏差比较的指标
RELATIVE_FIELDS = (
    'total_throughput',
    'productive_throughput',
    'skipping_throughput',
    'utilization',
    'mean_queue_length',
    'mean_waiting_time',
)


def relative_deviation(a: float, b: float) -> float:
    """|a - b| / max(|a|, |b|)，两者都为 0 时为 0"""
    scale = max(abs(a), abs(b))
    if scale == 0:
        return 0.0
    return abs(a - b) / scale


def distribution_deviation(a: Sequence[float], b: Sequence[float]) -> float:
    """逐分量绝对偏差的最大值（较短的一方补 0）"""
    size = max(len(a), len(b))
    padded_a = list(a) + [0.0] * (size - len(a))
    padded_b = list(b) + [0.0] * (size - len(b))
    return max((abs(x - y) for x, y in zip(padded_a, padded_b)), default=0.0)


def compare_reports(
    reference: Sequence[StationReport],
    candidate: Sequence[StationReport]
) -> Dict[str, float]:
    """
    比较两组站点报告

    Returns:
        dict: 指标族 -> 最大偏差（分布为绝对偏差，其余为相对偏差）
    """
    deviations = {name: 0.0 for name in RELATIVE_FIELDS}
    deviations['distribution'] = 0.0
    for ref, cand in zip(reference, candidate):
        for name in RELATIVE_FIELDS:
            deviations[name] = max(
                deviations[name], relative_deviation(getattr(ref, name), getattr(cand, name))
            )
        deviations['distribution'] = max(
            deviations['distribution'], distribution_deviation(ref.distribution, cand.distribution)
        )
    return deviations


@dataclass
class VerificationSummary:
    """
    验证结果

    Attributes:
        population: 验证到的人口数 N（覆盖 1..N）
        tolerance: 容差
        deviations: 比较对 -> 指标族 -> 最大偏差
        exempted: MVA 因稳定性标记被豁免的人口数
    """
    population: int
    tolerance: float
    deviations: Dict[str, Dict[str, float]] = field(default_factory=dict)
    exempted: List[int] = field(default_factory=list)

    def _merge(self, pair: str, values: Dict[str, float]) -> None:
        current = self.deviations.setdefault(pair, {})
        for name, value in values.items():
            current[name] = max(current.get(name, 0.0), value)

    @property
    def failures(self) -> List[str]:
        """超出容差的 比较对/指标族"""
        return [
            f"{pair}/{name}"
            for pair, values in self.deviations.items()
            for name, value in values.items()
            if not value < self.tolerance
        ]

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_dict(self) -> Dict:
        return {
            'population': self.population,
            'tolerance': self.tolerance,
            'passed': self.passed,
            'deviations': self.deviations,
            'mva_exempted_populations': self.exempted,
            'failures': self.failures
        }


def verify_model(
    model: NetworkModel,
    visits: VisitRatios,
    population: int,
    *,
    tolerance: Optional[float] = None,
    state_limit: Optional[int] = None
) -> VerificationSummary:
    """
    在 n = 1..N 上交叉验证三种求解器与 Oracle

    以卷积结果为基准：Oracle 比较归一化常数与边缘分布，
    MVA 与稳定 MVA 比较全部报告字段。MVA 在出现稳定性标记（含之后）的人口数上被豁免。

    Args:
        model: 已校验的模型
        visits: 访问比
        population: 人口数 N
        tolerance: 容差（默认取配置值），偏差必须严格小于该值
        state_limit: Oracle 状态数上限（默认取配置值）

    Returns:
        VerificationSummary: 验证结果

    Raises:
        InfeasiblePopulationError: N > n_max
        StateSpaceLimitError: Oracle 状态空间过大
    """
    settings = get_config().solver
    if tolerance is None:
        tolerance = settings.verify_tolerance
    if state_limit is None:
        state_limit = settings.oracle_state_limit
    require_feasible(model, population)
    count = count_states(model.capacities, population)
    if count > state_limit:
        raise StateSpaceLimitError(count, state_limit)

    summary = VerificationSummary(population=population, tolerance=tolerance)
    populations = list(range(1, population + 1))
    if not populations:
        return summary

    gtable = compute_g(model, visits, population)
    convolution = solve_convolution(model, visits, populations)
    stable = solve_stable(model, visits, populations)
    states = run_mva(model, visits, population)

    for n, conv_reports, stable_reports, state in zip(populations, convolution, stable, states):
        oracle = direct_solution(model, visits, n, limit=state_limit)
        summary._merge('oracle', {
            'normalization': relative_difference(gtable.normalization(n), oracle.normalization),
            'distribution': max(
                distribution_deviation(report.distribution, oracle.marginals[report.station])
                for report in conv_reports
            )
        })
        summary._merge('stable-mva', compare_reports(conv_reports, stable_reports))
        if state.degraded:
            summary.exempted.append(n)
        else:
            summary._merge('mva', compare_reports(conv_reports, state.to_reports()))

    if summary.exempted:
        logger.warning(f"MVA 在人口数 {summary.exempted} 上出现稳定性标记，已豁免")
    logger.info(f"验证完成: {'通过' if summary.passed else '失败'}")
    return summary
