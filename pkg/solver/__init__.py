"""
solver 包

包含网络校验、卷积、性能指标、扩展 MVA、稳定 MVA、枚举 Oracle 与交叉验证模块。
"""

from .network import validate_model, solve_visit_ratios, service_function, n_max
from .convolution import GTable, GSplit, compute_g, compute_g_split, g_complement
from .metrics import solve_convolution, station_report
from .mva import run_mva, mva_reports
from .stable_mva import solve_tandem_chain, back_propagate, final_indices, solve_stable
from .oracle import enumerate_states, direct_solution
from .verify import verify_model, VerificationSummary

__all__ = [
    'validate_model',
    'solve_visit_ratios',
    'service_function',
    'n_max',
    'GTable',
    'GSplit',
    'compute_g',
    'compute_g_split',
    'g_complement',
    'solve_convolution',
    'station_report',
    'run_mva',
    'mva_reports',
    'solve_tandem_chain',
    'back_propagate',
    'final_indices',
    'solve_stable',
    'enumerate_states',
    'direct_solution',
    'verify_model',
    'VerificationSummary'
]
