"""
配置管理模块

负责加载和管理求解器配置，包括数值容差、Oracle 状态上限、日志与路径配置等。
"""

import os
import json
from pathlib import Path
from typing import Optional
from dataclasses import dataclass
from dotenv import load_dotenv


# 加载 .env 文件
load_dotenv()


SOLVER_NAME = "skipnet"
SOLVER_VERSION = "1.0.0"


@dataclass(frozen=True)
class SolverConfig:
    """
    求解器数值配置类

    Attributes:
        row_sum_tolerance: 路由矩阵行和容差，超出则拒绝
        visit_residual: V = V·Q 的相对残差上限
        instability_threshold: MVA 中由补集得到的 p_i(0,n) 低于该值即标记不稳定
        negative_threshold: MVA 分布中低于该值的负分量标记不稳定
        oracle_state_limit: 枚举 Oracle 允许的最大状态数
        verify_tolerance: verify 命令的默认容差
        default_method: 默认求解方法
    """
    row_sum_tolerance: float = 1e-12
    visit_residual: float = 1e-10
    instability_threshold: float = 1e-10
    negative_threshold: float = -1e-12
    oracle_state_limit: int = 10_000_000
    verify_tolerance: float = 1e-9
    default_method: str = "convolution"

    @classmethod
    def from_env(cls) -> 'SolverConfig':
        """
        从环境变量加载求解器配置

        Returns:
            SolverConfig: 求解器配置实例
        """
        return cls(
            row_sum_tolerance=float(os.getenv('SKIPNET_ROW_SUM_TOLERANCE', '1e-12')),
            visit_residual=float(os.getenv('SKIPNET_VISIT_RESIDUAL', '1e-10')),
            instability_threshold=float(os.getenv('SKIPNET_INSTABILITY_THRESHOLD', '1e-10')),
            negative_threshold=float(os.getenv('SKIPNET_NEGATIVE_THRESHOLD', '-1e-12')),
            oracle_state_limit=int(os.getenv('SKIPNET_ORACLE_STATE_LIMIT', '10000000')),
            verify_tolerance=float(os.getenv('SKIPNET_VERIFY_TOLERANCE', '1e-9')),
            default_method=os.getenv('SKIPNET_DEFAULT_METHOD', 'convolution'),
        )


@dataclass(frozen=True)
class LoggingConfig:
    """
    日志配置类

    Attributes:
        level: 日志级别名称
        log_dir: 日志文件目录（可选，未设置时只输出到 stderr）
    """
    level: str = "WARNING"
    log_dir: Optional[Path] = None

    @classmethod
    def from_env(cls) -> 'LoggingConfig':
        """
        从环境变量加载日志配置

        Returns:
            LoggingConfig: 日志配置实例
        """
        log_dir = os.getenv('SKIPNET_LOG_DIR')
        return cls(
            level=os.getenv('SKIPNET_LOG_LEVEL', 'WARNING').upper(),
            log_dir=Path(log_dir) if log_dir else None,
        )


@dataclass(frozen=True)
class PathConfig:
    """
    路径配置类

    Attributes:
        project_root: 项目根目录
        schemas_dir: JSON Schema 文件目录
    """
    project_root: Path
    schemas_dir: Path

    @classmethod
    def default(cls) -> 'PathConfig':
        """
        创建默认路径配置

        Returns:
            PathConfig: 路径配置实例
        """
        project_root = Path(__file__).parent
        return cls(
            project_root=project_root,
            schemas_dir=project_root / 'schemas',
        )


@dataclass(frozen=True)
class Config:
    """
    全局配置类

    Attributes:
        solver: 求解器数值配置
        logging: 日志配置
        paths: 路径配置
    """
    solver: SolverConfig
    logging: LoggingConfig
    paths: PathConfig

    @classmethod
    def load(cls) -> 'Config':
        """
        加载完整配置

        Returns:
            Config: 配置实例
        """
        return cls(
            solver=SolverConfig.from_env(),
            logging=LoggingConfig.from_env(),
            paths=PathConfig.default(),
        )


# 全局配置实例
config = Config.load()


def get_config() -> Config:
    """
    获取全局配置实例

    Returns:
        Config: 配置实例
    """
    return config


def load_schema(name: str) -> dict:
    """
    加载 JSON Schema

    Args:
        name: Schema 文件名（不含 .schema.json 扩展名）

    Returns:
        dict: JSON Schema 字典

    Raises:
        FileNotFoundError: 如果 Schema 文件不存在
    """
    schema_path = config.paths.schemas_dir / f"{name}.schema.json"

    if not schema_path.exists():
        raise FileNotFoundError(f"Schema 文件不存在: {schema_path}")

    with open(schema_path, 'r', encoding='utf-8') as f:
        return json.load(f)
