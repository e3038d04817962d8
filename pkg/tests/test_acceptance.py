"""
验收测试：随机模型语料、高负载压力模型与规模模型
"""

import time

import numpy as np
import pytest

from solver.convolution import compute_g, compute_g_split, g_complement
from solver.metrics import solve_convolution
from solver.mva import run_mva
from solver.network import n_max, solve_visit_ratios
from solver.oracle import direct_solution
from solver.stable_mva import solve_stable
from solver.verify import compare_reports, distribution_deviation, verify_model
from utils.fixtures import cyclic_model
from utils.scaled import relative_difference

pytestmark = pytest.mark.slow


def test_corpus_normalization_matches_oracle(corpus):
    for model, visits in corpus:
        limit = n_max(model)
        table = compute_g(model, visits, limit)
        for n in range(limit + 1):
            oracle = direct_solution(model, visits, n)
            assert relative_difference(table.normalization(n), oracle.normalization) < 1e-12


def test_corpus_marginals_match_oracle(corpus):
    for model, visits in corpus:
        limit = n_max(model)
        for n, reports in enumerate(solve_convolution(model, visits, range(1, limit + 1)), start=1):
            oracle = direct_solution(model, visits, n)
            for report in reports:
                assert distribution_deviation(
                    report.distribution, oracle.marginals[report.station]
                ) < 1e-12


def test_corpus_three_way_agreement(corpus):
    for model, visits in corpus:
        populations = list(range(1, n_max(model) + 1))
        convolution = solve_convolution(model, visits, populations)
        stable = solve_stable(model, visits, populations)
        states = run_mva(model, visits, populations[-1])
        for conv_reports, stable_reports, state in zip(convolution, stable, states):
            assert max(compare_reports(conv_reports, stable_reports).values()) < 1e-9
            if not state.degraded:
                assert max(compare_reports(conv_reports, state.to_reports()).values()) < 1e-8


def test_corpus_flow_conservation(corpus):
    for model, visits in corpus:
        q = model.routing.as_array()
        limit = n_max(model)
        for reports in solve_convolution(model, visits, range(1, limit + 1)):
            x = np.array([r.total_throughput for r in reports])
            assert np.max(np.abs(x - x @ q)) <= 1e-9 * np.max(x)
            for report in reports:
                assert abs(
                    report.total_throughput
                    - report.productive_throughput
                    - report.skipping_throughput
                ) <= 1e-10 * report.total_throughput


def test_corpus_saturation(corpus):
    for model, visits in corpus:
        limit = n_max(model)
        conv = solve_convolution(model, visits, [limit])[0]
        stable = solve_stable(model, visits, [limit])[0]
        state = run_mva(model, visits, limit)[-1]
        checks = [(conv, 1e-10), (stable, 1e-10)]
        # 满载时 p_i(0, n) 恰为 0，MVA 的补集会触发不稳定标记
        if not state.degraded:
            checks.append((state.to_reports(), 1e-6))
        for reports, tolerance in checks:
            for station, report in zip(model.stations, reports):
                assert report.distribution[-1] == pytest.approx(1.0, abs=tolerance)
                assert report.productive_throughput == pytest.approx(
                    1.0 / station.service_time, rel=tolerance
                )


def test_corpus_complement_consistency(corpus):
    for model, visits in corpus[:50]:
        limit = n_max(model)
        split = compute_g_split(model, visits, limit)
        for i in range(model.size):
            complement = g_complement(split, i)
            rest = [j for j in range(model.size) if j != i]
            expected = np.zeros(limit + 1)
            expected[0] = 1.0
            for j in rest:
                factor = np.array([
                    visits.demands[j] ** k if k <= model.capacities[j] else 0.0
                    for k in range(limit + 1)
                ])
                expected = np.convolve(expected, factor)[:limit + 1]
            actual = complement.to_floats()
            nonzero = expected != 0.0
            assert np.all(actual[~nonzero] == 0.0)
            assert np.all(np.abs(actual[nonzero] - expected[nonzero])
                          <= 1e-10 * expected[nonzero])


def test_corpus_verify_passes(corpus):
    for model, visits in corpus[:40]:
        summary = verify_model(model, visits, n_max(model), tolerance=1e-8)
        assert summary.passed, summary.failures


def test_high_load_stress():
    model = cyclic_model((30, 30), (10.0, 1.0))
    visits = solve_visit_ratios(model)
    populations = list(range(1, 61))

    states = run_mva(model, visits, 60)
    assert any(state.flagged for state in states if state.population < 60)

    stable = solve_stable(model, visits, populations)
    for reports in stable:
        for report in reports:
            assert min(report.distribution) >= 0.0
            assert sum(report.distribution) == pytest.approx(1.0, abs=1e-12)

    reference = solve_convolution(model, visits, [30, 45, 60])
    for n, conv_reports in zip((30, 45, 60), reference):
        assert max(compare_reports(conv_reports, stable[n - 1]).values()) < 1e-9


def test_scale_model_runs_quickly():
    model = cyclic_model([20] * 50, [1.0 + 0.1 * (i % 7) for i in range(50)])
    visits = solve_visit_ratios(model)
    start = time.perf_counter()
    reports = solve_convolution(model, visits, [500])[0]
    elapsed = time.perf_counter() - start
    assert elapsed < 1.0
    for report in reports:
        assert np.isfinite(report.total_throughput)
        assert sum(report.distribution) == pytest.approx(1.0, abs=1e-10)
