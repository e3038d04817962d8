"""
归一化常数表测试
"""

import dataclasses

import numpy as np
import pytest
from hypothesis import given, strategies as st

from models import NetworkModel, RoutingMatrix, VisitRatios
from solver.convolution import compute_g, compute_g_split, compute_g_subtractive, g_complement
from solver.network import extend_with_shorted_station, n_max, solve_visit_ratios
from utils.fixtures import cyclic_model, random_model
from utils.scaled import ScaledValue

seeds = st.integers(min_value=0, max_value=100_000)
sizes = st.integers(min_value=2, max_value=5)


def _assert_close(actual, expected, rel=1e-10):
    actual = np.asarray(actual, dtype=float)
    expected = np.asarray(expected, dtype=float)
    assert actual.shape == expected.shape
    zero = expected == 0.0
    assert np.all(actual[zero] == 0.0)
    assert np.all(np.abs(actual[~zero] - expected[~zero]) <= rel * np.abs(expected[~zero]))


def _without_station(model, visits, station):
    stations = model.stations[:station] + model.stations[station + 1:]
    reduced = NetworkModel(
        stations=stations,
        routing=RoutingMatrix.from_rows(np.eye(len(stations)))
    )
    return reduced, visits.drop(station)


def test_two_station_cycle(net_a):
    model, visits = net_a
    table = compute_g(model, visits, 2)
    assert table.final.to_floats().tolist() == [1.0, 2.0, 1.0]


def test_asymmetric_cycle(net_b):
    model, visits = net_b
    table = compute_g(model, visits, 3)
    assert table.final.to_floats().tolist() == [1.0, 3.0, 3.0, 2.0]
    assert table.to_floats()[:, 0].tolist() == [1.0, 1.0, 1.0, 0.0]


def test_zero_population(net_a):
    model, visits = net_a
    table = compute_g(model, visits, 0)
    assert table.final.to_floats().tolist() == [1.0]
    with pytest.raises(ValueError):
        compute_g(model, visits, -1)


def test_entries_beyond_n_max_are_exact_zeros(net_a):
    model, visits = net_a
    table = compute_g(model, visits, 4)
    assert table.normalization(3) == ScaledValue()
    assert table.normalization(4) == ScaledValue()
    assert table.value(-1, 0) == ScaledValue()


def test_first_row_is_one(net_c):
    model, visits = net_c
    table = compute_g(model, visits, 3)
    assert table.to_floats()[0].tolist() == [1.0, 1.0, 1.0]


def test_subtractive_form_agrees(net_b):
    model, visits = net_b
    stable = compute_g(model, visits, 3)
    subtractive = compute_g_subtractive(model, visits, 3)
    assert subtractive.final.to_floats().tolist() == [1.0, 3.0, 3.0, 2.0]
    _assert_close(subtractive.to_floats(), stable.to_floats(), rel=1e-12)


@pytest.mark.parametrize("capacities,service_times", [
    ((2, 3, 1), (0.5, 2.0, 1.5)),
    ((3, 1, 2, 2), (1.0, 3.0, 0.25, 1.5)),
])
def test_subtractive_form_agrees_with_non_unit_demands(capacities, service_times):
    model = cyclic_model(capacities, service_times)
    visits = solve_visit_ratios(model)
    limit = n_max(model)
    stable = compute_g(model, visits, limit)
    subtractive = compute_g_subtractive(model, visits, limit)
    _assert_close(subtractive.to_floats(), stable.to_floats(), rel=1e-9)


@given(seeds, sizes)
def test_station_order_does_not_change_normalization(seed, stations):
    model = random_model(seed, stations=stations)
    visits = solve_visit_ratios(model)
    limit = n_max(model)
    perm = np.random.default_rng(seed).permutation(stations)
    permuted = NetworkModel(
        stations=tuple(model.stations[p] for p in perm),
        routing=RoutingMatrix.from_rows(np.eye(stations))
    )
    permuted_visits = VisitRatios(
        values=tuple(visits.values[p] for p in perm),
        demands=tuple(visits.demands[p] for p in perm)
    )
    original = compute_g(model, visits, limit).final
    reordered = compute_g(permuted, permuted_visits, limit).final
    for n in range(limit + 1):
        assert reordered[n].ratio(original[n]) == pytest.approx(1.0, rel=1e-10)


@given(seeds, sizes)
def test_boundary_value_at_n_max(seed, stations):
    model = random_model(seed, stations=stations)
    visits = solve_visit_ratios(model)
    limit = n_max(model)
    table = compute_g(model, visits, limit)
    expected = ScaledValue.one()
    for station, demand in zip(model.stations, visits.demands):
        expected = expected * ScaledValue.power(demand, station.capacity)
    assert table.normalization(limit).ratio(expected) == pytest.approx(1.0, rel=1e-12)


@given(seeds, sizes, st.integers(min_value=0, max_value=40))
def test_multiplication_count_bound(seed, stations, population):
    model = random_model(seed, stations=stations)
    visits = solve_visit_ratios(model)
    table = compute_g(model, visits, population)
    bound = 2 * max(model.capacities) * max(population, 1) * model.size
    assert table.multiplications <= bound


def test_multiplication_count_includes_every_tail_product(net_a):
    model, visits = net_a
    # 每站：头部 1 次，尾部 1 行 × 2 项
    assert compute_g(model, visits, 2).multiplications == 6
    single = cyclic_model((2,), (1.0,))
    # 头部 2 次，尾部 3 行 × 3 项
    assert compute_g(single, solve_visit_ratios(single), 5).multiplications == 11


def test_large_network_stays_finite():
    model = cyclic_model([20] * 50, [1.0 + 0.1 * (i % 7) for i in range(50)])
    visits = solve_visit_ratios(model)
    table = compute_g(model, visits, 500)
    assert np.all(np.isfinite(table.mantissa))
    assert not table.normalization(500).is_zero
    assert table.normalization(500).exponent > 0


def test_split_tables(net_b):
    model, visits = net_b
    split = compute_g_split(model, visits, 3)
    assert split.up.final.to_floats().tolist() == [1.0, 3.0, 3.0, 2.0]
    assert split.down.column(0).to_floats().tolist() == [1.0, 3.0, 3.0, 2.0]
    assert split.down.column(1).to_floats().tolist() == [1.0, 2.0, 0.0, 0.0]


def test_complement_of_two_station_cycle(net_b):
    model, visits = net_b
    split = compute_g_split(model, visits, 3)
    assert g_complement(split, 0).to_floats().tolist() == [1.0, 2.0, 0.0, 0.0]
    assert g_complement(split, 1).to_floats().tolist() == [1.0, 1.0, 1.0, 0.0]
    assert g_complement(split, 1) is split.complements[1]
    assert len(split.complements) == model.size
    with pytest.raises(IndexError):
        g_complement(split, 2)
    with pytest.raises(IndexError):
        g_complement(split, -1)
    with pytest.raises(dataclasses.FrozenInstanceError):
        split.complements = ()


def test_complement_of_interior_station(net_c):
    model, visits = net_c
    split = compute_g_split(model, visits, 3)
    assert g_complement(split, 1).to_floats().tolist() == [1.0, 2.0, 1.0, 0.0]


def test_complement_of_single_station():
    model = cyclic_model((3,), (2.0,))
    visits = solve_visit_ratios(model)
    split = compute_g_split(model, visits, 3)
    assert g_complement(split, 0).to_floats().tolist() == [1.0, 0.0, 0.0, 0.0]


@given(seeds, st.integers(min_value=3, max_value=6))
def test_complement_matches_deleted_station_network(seed, stations):
    model = random_model(seed, stations=stations)
    visits = solve_visit_ratios(model)
    limit = n_max(model)
    split = compute_g_split(model, visits, limit)
    for i in range(stations):
        reduced, reduced_visits = _without_station(model, visits, i)
        expected = compute_g(reduced, reduced_visits, limit).final
        actual = g_complement(split, i)
        for n in range(limit + 1):
            if expected[n].is_zero:
                assert actual[n].is_zero
            else:
                assert actual[n].ratio(expected[n]) == pytest.approx(1.0, rel=1e-10)


@given(seeds, sizes)
def test_shorted_station_leaves_normalization_unchanged(seed, stations):
    model = random_model(seed, stations=stations)
    visits = solve_visit_ratios(model)
    limit = n_max(model)
    extended = extend_with_shorted_station(model, after=0, capacity=limit)
    extended_visits = solve_visit_ratios(extended)
    original = compute_g(model, visits, limit).final
    widened = compute_g(extended, extended_visits, limit).final
    for n in range(limit + 1):
        assert widened[n].ratio(original[n]) == pytest.approx(1.0, rel=1e-12)
