"""
有限缓冲区闭合排队网络求解器 - 主程序

读取 JSON 模型文件，用卷积 / 扩展 MVA / 稳定 MVA 求解稳态性能指标，
或与枚举 Oracle 交叉验证。

使用方法:
    python main.py solve -m net.json -n 4 --method convolution --format json
    python main.py sweep -m net.json --from 1 --to 8 --format csv
    python main.py verify -m net.json -n 4
    python main.py generate --seed 7 -M 3 -o random.json
"""

import argparse
import logging
import sys
import time
from datetime import datetime
from typing import Dict, List, Optional, Sequence, Tuple

from config import SOLVER_NAME, SOLVER_VERSION, get_config
from models import NetworkModel, OutputFormat, SolverMethod, StationReport, VisitRatios
from solver.errors import (
    InfeasiblePopulationError,
    ModelValidationError,
    SingularSystemError,
    SkipNetError,
    StateSpaceLimitError,
)
from solver.metrics import empty_report, solve_convolution
from solver.mva import run_mva
from solver.network import n_max, require_feasible, solve_visit_ratios
from solver.stable_mva import solve_stable
from solver.verify import verify_model
from utils.fixtures import random_model
from utils.model_loader import load_model, save_model
from utils.report_writer import build_report, render

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INVALID_MODEL = 2
EXIT_INFEASIBLE = 3
EXIT_SIZE_LIMIT = 4
EXIT_VERIFY_FAILED = 5


class CliParser(argparse.ArgumentParser):
    """用法错误统一以退出码 1 结束（argparse 默认为 2，与模型校验失败冲突）"""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: 错误: {message}\n")


def setup_logging(level: Optional[str] = None) -> Optional[str]:
    """
    设置日志系统：输出到 stderr，配置了日志目录时同时写入文件

    stdout 只用于输出报告。

    Args:
        level: 日志级别（默认取配置值）

    Returns:
        str: 日志文件路径（未配置日志目录时为 None）
    """
    settings = get_config().logging
    handlers: List[logging.Handler] = [logging.StreamHandler(sys.stderr)]
    log_file = None
    if settings.log_dir is not None:
        settings.log_dir.mkdir(parents=True, exist_ok=True)
        timestamp = datetime.now().strftime("%Y%m%d_%H%M%S")
        log_file = settings.log_dir / f"{SOLVER_NAME}_{timestamp}.log"
        handlers.append(logging.FileHandler(log_file, encoding='utf-8'))

    logging.basicConfig(
        level=getattr(logging, (level or settings.level).upper(), logging.WARNING),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        handlers=handlers,
        force=True
    )
    return str(log_file) if log_file else None


def solve_populations(
    model: NetworkModel,
    visits: VisitRatios,
    method: SolverMethod,
    populations: Sequence[int]
) -> Tuple[List[List[StationReport]], Dict[int, List[str]]]:
    """
    用指定方法求解一组人口数（递推方法只做一次递推）

    Args:
        model: 已校验的模型
        visits: 访问比
        method: 求解方法
        populations: 人口数列表

    Returns:
        tuple: (每个人口数的站点报告, MVA 稳定性标记 {人口数: [站点名称]})
    """
    for n in populations:
        require_feasible(model, n)
    if method is SolverMethod.CONVOLUTION:
        return solve_convolution(model, visits, populations), {}
    if method is SolverMethod.STABLE_MVA:
        return solve_stable(model, visits, populations), {}

    states = {state.population: state for state in run_mva(model, visits, max(populations, default=0))}
    results = []
    flags: Dict[int, List[str]] = {}
    for n in populations:
        if n == 0:
            results.append([empty_report(i) for i in range(model.size)])
            continue
        state = states[n]
        results.append(state.to_reports())
        if state.flagged:
            flags[n] = [model.stations[i].name for i, flag in enumerate(state.stability_flags) if flag]
    return results, flags


def _emit(model: NetworkModel, visits: VisitRatios, method: SolverMethod,
          populations: Sequence[int], output_format: OutputFormat) -> int:
    start = time.perf_counter()
    results, flags = solve_populations(model, visits, method, populations)
    elapsed = time.perf_counter() - start
    document = build_report(model, visits, method, results, flags=flags, elapsed_seconds=elapsed)
    if flags:
        logger.warning(f"MVA 在人口数 {sorted(flags)} 上出现稳定性标记，建议使用 --method stable-mva")
    sys.stdout.write(render(document, output_format))
    return EXIT_OK


def cmd_solve(args: argparse.Namespace) -> int:
    """solve 子命令"""
    model = load_model(args.model)
    visits = solve_visit_ratios(model)
    return _emit(model, visits, SolverMethod(args.method), [args.population],
                 OutputFormat(args.format))


def cmd_sweep(args: argparse.Namespace) -> int:
    """sweep 子命令"""
    model = load_model(args.model)
    visits = solve_visit_ratios(model)
    populations = list(range(args.start, args.stop + 1))
    return _emit(model, visits, SolverMethod(args.method), populations, OutputFormat(args.format))


def cmd_verify(args: argparse.Namespace) -> int:
    """verify 子命令"""
    model = load_model(args.model)
    visits = solve_visit_ratios(model)
    summary = verify_model(model, visits, args.population, tolerance=args.tolerance)

    print("=" * 60)
    print(f"交叉验证: n = 1..{summary.population}，容差 {summary.tolerance:g}")
    print("=" * 60)
    for pair, values in summary.deviations.items():
        print(f"\n[{pair}]")
        for name, value in values.items():
            mark = "✓" if value < summary.tolerance else "❌"
            print(f"  {mark} {name}: {value:.3e}")
    if summary.exempted:
        print(f"\n⚠️  MVA 在人口数 {summary.exempted} 上出现稳定性标记，已豁免")
    if summary.passed:
        print("\n✓ 验证通过")
        return EXIT_OK
    print(f"\n❌ 验证失败: {', '.join(summary.failures)}")
    return EXIT_VERIFY_FAILED


def cmd_generate(args: argparse.Namespace) -> int:
    """generate 子命令"""
    model = random_model(args.seed, stations=args.stations, max_capacity=args.max_capacity)
    save_model(model, args.output)
    print(f"✓ 已生成模型: {args.output} (M={model.size}, n_max={n_max(model)})")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    """构造命令行解析器"""
    settings = get_config().solver
    methods = [m.value for m in SolverMethod]
    formats = [f.value for f in OutputFormat]

    parser = CliParser(
        prog=SOLVER_NAME,
        description='有限缓冲区、跳过路由的单类闭合排队网络解析求解器',
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
示例:
  %(prog)s solve -m netA.json -n 2 --method convolution --format json
  %(prog)s sweep -m netB.json --from 1 --to 3 --method stable-mva --format csv
  %(prog)s verify -m netA.json -n 2 --tolerance 1e-9
  %(prog)s generate --seed 42 -M 3 --max-capacity 4 -o random.json

退出码:
  0 成功  1 用法错误  2 模型校验失败  3 人口数不可行  4 Oracle 状态空间超限  5 验证失败
        """
    )
    parser.add_argument('--version', action='version', version=f"%(prog)s {SOLVER_VERSION}")
    parser.add_argument('--log-level', default=None, help='日志级别 (默认取 SKIPNET_LOG_LEVEL)')
    subparsers = parser.add_subparsers(dest='command', required=True, parser_class=CliParser)

    solve = subparsers.add_parser('solve', help='求解单个人口数')
    solve.add_argument('-m', '--model', required=True, help='模型 JSON 文件')
    solve.add_argument('-n', '--population', type=int, required=True, help='人口数 N')
    solve.add_argument('--method', choices=methods, default=settings.default_method)
    solve.add_argument('--format', choices=formats, default=OutputFormat.TABLE.value)
    solve.set_defaults(handler=cmd_solve)

    sweep = subparsers.add_parser('sweep', help='求解一段人口数区间')
    sweep.add_argument('-m', '--model', required=True, help='模型 JSON 文件')
    sweep.add_argument('--from', dest='start', type=int, required=True, help='起始人口数')
    sweep.add_argument('--to', dest='stop', type=int, required=True, help='终止人口数（含）')
    sweep.add_argument('--method', choices=methods, default=settings.default_method)
    sweep.add_argument('--format', choices=formats, default=OutputFormat.TABLE.value)
    sweep.set_defaults(handler=cmd_sweep)

    verify = subparsers.add_parser('verify', help='与枚举 Oracle 交叉验证三种求解器')
    verify.add_argument('-m', '--model', required=True, help='模型 JSON 文件')
    verify.add_argument('-n', '--population', type=int, required=True, help='人口数 N')
    verify.add_argument('--tolerance', type=float, default=settings.verify_tolerance,
                        help='容差（偏差必须严格小于该值）')
    verify.set_defaults(handler=cmd_verify)

    generate = subparsers.add_parser('generate', help='生成随机测试模型')
    generate.add_argument('--seed', type=int, required=True, help='随机种子')
    generate.add_argument('-M', '--stations', type=int, default=3, help='站点数')
    generate.add_argument('--max-capacity', type=int, default=4, help='容量上限')
    generate.add_argument('-o', '--output', required=True, help='输出路径')
    generate.set_defaults(handler=cmd_generate)

    return parser


def _check_arguments(parser: argparse.ArgumentParser, args: argparse.Namespace) -> None:
    if args.command in ('solve', 'verify') and args.population < 0:
        parser.error("人口数必须 >= 0")
    if args.command == 'verify' and args.population < 1:
        parser.error("verify 的人口数必须 >= 1")
    if args.command == 'verify' and args.tolerance < 0:
        parser.error("容差必须 >= 0")
    if args.command == 'sweep':
        if args.start < 1:
            parser.error("--from 必须 >= 1")
        if args.start > args.stop:
            parser.error(f"--from ({args.start}) 不能大于 --to ({args.stop})")
    if args.command == 'generate' and (args.stations < 1 or args.max_capacity < 1):
        parser.error("站点数与容量上限必须 >= 1")


def cli(argv: Optional[Sequence[str]] = None) -> int:
    """
    命令行入口

    Args:
        argv: 参数列表（默认取 sys.argv[1:]）

    Returns:
        int: 退出码
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        _check_arguments(parser, args)
    except SystemExit as e:
        return int(e.code or 0)
    setup_logging(args.log_level)

    try:
        return args.handler(args)
    except (ModelValidationError, SingularSystemError, FileNotFoundError) as e:
        print(f"❌ 模型无效: {e}", file=sys.stderr)
        return EXIT_INVALID_MODEL
    except InfeasiblePopulationError as e:
        print(f"❌ {e}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except StateSpaceLimitError as e:
        print(f"❌ {e}", file=sys.stderr)
        return EXIT_SIZE_LIMIT
    except SkipNetError as e:
        logger.exception("求解失败")
        print(f"❌ 求解失败: {e}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as e:
        logger.exception("发生未预期的错误")
        print(f"❌ 发生未预期的错误: {e}", file=sys.stderr)
        return EXIT_USAGE


def main():
    """主函数"""
    sys.exit(cli())


if __name__ == "__main__":
    main()
