"""
扩展 MVA 测试
"""

import numpy as np
import pytest
from hypothesis import given, strategies as st

from solver.errors import InfeasiblePopulationError
from solver.mva import mva_reports, run_mva
from solver.network import solve_visit_ratios
from utils.fixtures import random_model

seeds = st.integers(min_value=0, max_value=100_000)
sizes = st.integers(min_value=2, max_value=4)


def test_two_station_cycle(net_a):
    model, visits = net_a
    first, second = run_mva(model, visits, 2)
    assert first.total_throughputs == pytest.approx((0.5, 0.5))
    assert first.distributions[0] == pytest.approx((0.5, 0.5))
    assert first.mean_queue_lengths == pytest.approx((0.5, 0.5))
    assert second.total_throughputs == pytest.approx((2.0, 2.0))
    assert second.skipping_throughputs == pytest.approx((1.0, 1.0))
    assert second.distributions[0] == pytest.approx((0.0, 1.0), abs=1e-15)


def test_flags_trip_when_idle_probability_vanishes(net_a):
    model, visits = net_a
    first, second = run_mva(model, visits, 2)
    assert not first.flagged
    assert not first.degraded
    assert second.stability_flags == (True, True)
    assert second.degraded


def test_degraded_is_sticky(net_b):
    model, visits = net_b
    states = run_mva(model, visits, 3)
    assert [s.flagged for s in states] == [False, True, True]
    assert [s.degraded for s in states] == [False, True, True]


def test_asymmetric_cycle(net_b):
    model, visits = net_b
    state = run_mva(model, visits, 2)[1]
    assert state.total_throughputs[1] == pytest.approx(1.0, rel=1e-14)
    assert state.distributions[1] == pytest.approx((1 / 3, 2 / 3), rel=1e-14)
    assert state.skipping_throughputs[1] == pytest.approx(2 / 3, rel=1e-14)
    assert state.productive_throughputs[1] == pytest.approx(1 / 3, rel=1e-14)
    assert state.utilizations[1] == pytest.approx(2 / 3, rel=1e-14)


def test_zero_population_is_empty(net_a):
    model, visits = net_a
    assert run_mva(model, visits, 0) == []


def test_infeasible_population(net_a):
    model, visits = net_a
    with pytest.raises(InfeasiblePopulationError):
        run_mva(model, visits, 3)


def test_threshold_override(net_b):
    model, visits = net_b
    states = run_mva(model, visits, 3, threshold=-1.0, negative_threshold=-1.0)
    assert not any(s.flagged for s in states)


def test_reports_follow_states(net_b):
    model, visits = net_b
    states = run_mva(model, visits, 3)
    reports = mva_reports(states)
    assert [r[0].population for r in reports] == [1, 2, 3]
    assert reports[1][1].mean_waiting_time == states[1].waiting_times[1]


@given(seeds, sizes)
def test_population_identity(seed, stations):
    model = random_model(seed, stations=stations)
    visits = solve_visit_ratios(model)
    v = np.array(visits.values)
    for state in run_mva(model, visits, sum(model.capacities)):
        x_ref = state.total_throughputs[model.reference]
        assert x_ref * np.dot(v, state.waiting_times) == pytest.approx(state.population, rel=1e-12)
        assert sum(state.mean_queue_lengths) == pytest.approx(state.population, rel=1e-12)


@given(seeds, sizes)
def test_simplified_form_agrees_with_summation(seed, stations):
    model = random_model(seed, stations=stations)
    visits = solve_visit_ratios(model)
    limit = min(model.capacities)
    simple = run_mva(model, visits, limit)
    general = run_mva(model, visits, limit, simplified=False)
    for a, b in zip(simple, general):
        assert a.waiting_times == pytest.approx(b.waiting_times, rel=1e-12)
        assert a.total_throughputs == pytest.approx(b.total_throughputs, rel=1e-12)


@given(seeds, sizes)
def test_utilization_below_capacity(seed, stations):
    model = random_model(seed, stations=stations)
    visits = solve_visit_ratios(model)
    for state in run_mva(model, visits, sum(model.capacities)):
        for i, station in enumerate(model.stations):
            if state.population <= station.capacity:
                assert state.utilizations[i] == pytest.approx(
                    state.total_throughputs[i] * station.service_time, rel=1e-12
                )
                assert state.skipping_throughputs[i] == 0.0
