"""
报告输出模块

把求解结果组装成 ReportDocument，并渲染为 table / json / csv 三种格式。
"""

import csv
import io
import json
import logging
from typing import Dict, List, Optional, Sequence

import jsonschema

from config import SOLVER_VERSION, load_schema
from models import (
    ModelEcho,
    NetworkModel,
    OutputFormat,
    PopulationResult,
    ReportDocument,
    SolverMethod,
    StationReport,
    VisitRatios,
)

logger = logging.getLogger(__name__)

CSV_COLUMNS = [
    'population',
    'station',
    'name',
    'total_throughput',
    'productive_throughput',
    'skipping_throughput',
    'utilization',
    'mean_queue_length',
    'mean_waiting_time',
    'stability_flag',
    'distribution',
]

TABLE_COLUMNS = [
    ('station', '站点'),
    ('total_throughput', 'X'),
    ('productive_throughput', 'X^P'),
    ('skipping_throughput', 'X^S'),
    ('utilization', 'U'),
    ('mean_queue_length', '平均队长'),
    ('mean_waiting_time', '平均逗留时间'),
]


def build_report(
    model: NetworkModel,
    visits: VisitRatios,
    method: SolverMethod,
    results: Sequence[Sequence[StationReport]],
    *,
    flags: Optional[Dict[int, Sequence[str]]] = None,
    elapsed_seconds: float = 0.0
) -> ReportDocument:
    """
    组装报告文档

    Args:
        model: 网络模型
        visits: 访问比
        method: 求解方法
        results: 每个人口数一组站点报告
        flags: 人口数 -> 触发稳定性标记的站点名称（仅 MVA）
        elapsed_seconds: 求解耗时

    Returns:
        ReportDocument: 报告文档
    """
    flags = flags or {}
    echo = ModelEcho(
        names=model.names,
        capacities=model.capacities,
        service_times=model.service_times,
        demands=visits.demands,
        visit_ratios=visits.values,
        reference=model.stations[model.reference].name
    )
    populations = tuple(
        PopulationResult(
            population=reports[0].population,
            stations=tuple(reports),
            stability_flags=tuple(flags.get(reports[0].population, ()))
        )
        for reports in results if reports
    )
    return ReportDocument(
        model=echo,
        method=method,
        version=SOLVER_VERSION,
        results=populations,
        elapsed_seconds=elapsed_seconds
    )


def validate_report(data: Dict) -> None:
    """
    按 report.schema.json 校验报告字典

    Raises:
        jsonschema.ValidationError: 报告结构不符合 Schema
    """
    jsonschema.validate(instance=data, schema=load_schema('report'))


def render_json(document: ReportDocument) -> str:
    """JSON 格式（浮点数使用最短往返表示）"""
    return json.dumps(document.to_dict(), ensure_ascii=False, indent=2)


def render_csv(document: ReportDocument) -> str:
    """CSV 格式，每行对应一个 (人口数, 站点)"""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator='\n')
    writer.writerow(CSV_COLUMNS)
    for result in document.results:
        flagged = set(result.stability_flags)
        for report in result.stations:
            name = document.model.names[report.station]
            writer.writerow([
                result.population,
                report.station,
                name,
                repr(report.total_throughput),
                repr(report.productive_throughput),
                repr(report.skipping_throughput),
                repr(report.utilization),
                repr(report.mean_queue_length),
                repr(report.mean_waiting_time),
                int(name in flagged),
                ';'.join(repr(p) for p in report.distribution),
            ])
    return buffer.getvalue()


def _format(value) -> str:
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


def render_table(document: ReportDocument) -> str:
    """表格格式（12 位有效数字）"""
    lines: List[str] = []
    lines.append("=" * 60)
    lines.append(f"求解方法: {document.method.value}  版本: {document.version}")
    lines.append(f"站点: {', '.join(document.model.names)}")
    lines.append(f"访问比: {', '.join(_format(v) for v in document.model.visit_ratios)}")
    lines.append("=" * 60)

    for result in document.results:
        lines.append("")
        lines.append(f"人口数 n = {result.population}")
        lines.append("-" * 60)
        rows = [[header for _, header in TABLE_COLUMNS]]
        for report in result.stations:
            row = [_format(getattr(report, key)) for key, _ in TABLE_COLUMNS]
            row[0] = document.model.names[report.station]
            rows.append(row)
        widths = [max(len(row[c]) for row in rows) for c in range(len(TABLE_COLUMNS))]
        for row in rows:
            lines.append("  ".join(cell.ljust(width) for cell, width in zip(row, widths)).rstrip())
        for report in result.stations:
            distribution = ", ".join(_format(p) for p in report.distribution)
            lines.append(f"  p[{document.model.names[report.station]}] = ({distribution})")
        if result.stability_flags:
            lines.append(f"  ⚠️  稳定性标记: {', '.join(result.stability_flags)}")

    lines.append("")
    lines.append(f"耗时: {document.elapsed_seconds:.6f} s")
    return "\n".join(lines) + "\n"


def render(document: ReportDocument, output_format: OutputFormat) -> str:
    """
    按格式渲染报告

    Args:
        document: 报告文档
        output_format: 输出格式

    Returns:
        str: 渲染结果
    """
    if output_format is OutputFormat.JSON:
        return render_json(document)
    if output_format is OutputFormat.CSV:
        return render_csv(document)
    return render_table(document)
