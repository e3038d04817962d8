"""
缩放浮点运算测试
"""

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from utils.scaled import ScaledArray, ScaledValue, aligned_sum, convolve, relative_difference

positive = st.floats(min_value=1e-300, max_value=1e300, allow_nan=False, allow_infinity=False)
moderate = st.floats(min_value=1e-100, max_value=1e100, allow_nan=False, allow_infinity=False)


def test_normalizes_mantissa_into_unit_octave():
    value = ScaledValue(3.0, 0)
    assert value.mantissa == 1.5
    assert value.exponent == 1


def test_zero_has_canonical_exponent():
    assert ScaledValue(0.0, 17) == ScaledValue()
    assert ScaledValue(0.0, 17).is_zero


def test_rejects_non_finite_mantissa():
    with pytest.raises(ValueError):
        ScaledValue(math.inf, 0)


def test_power_far_beyond_float_range():
    value = ScaledValue.power(2.0, 2000)
    assert value.mantissa == 1.0
    assert value.exponent == 2000
    assert value.to_float() == math.inf


def test_power_zero_exponent_is_one():
    assert ScaledValue.power(0.0, 0) == ScaledValue.one()


def test_ratio_of_huge_values_is_exact():
    big = ScaledValue.power(3.0, 1000)
    smaller = ScaledValue.power(3.0, 999)
    assert big.ratio(smaller) == pytest.approx(3.0, rel=1e-12)


def test_ratio_by_zero_raises():
    with pytest.raises(ZeroDivisionError):
        ScaledValue.one().ratio(ScaledValue())


def test_sum_and_subtraction():
    total = ScaledValue.sum(ScaledValue.from_float(v) for v in (1.0, 2.0, 3.0))
    assert total.to_float() == 6.0
    assert (ScaledValue.from_float(5.0) - ScaledValue.from_float(2.0)).to_float() == 3.0


def test_relative_difference():
    a = ScaledValue.from_float(1.0)
    b = ScaledValue.from_float(1.5)
    assert relative_difference(a, b) == pytest.approx(0.5 / 1.5, rel=1e-15)
    assert relative_difference(ScaledValue(), ScaledValue()) == 0.0


@given(moderate, moderate)
def test_product_matches_float_product(a, b):
    product = ScaledValue.from_float(a) * ScaledValue.from_float(b)
    assert product.to_float() == pytest.approx(a * b, rel=1e-15)


@given(st.lists(positive, min_size=1, max_size=50))
def test_aligned_sum_matches_fsum(values):
    array = ScaledArray.from_floats(values)
    total = aligned_sum(array.mantissa, array.exponent)
    expected = math.fsum(values)
    assert ScaledValue(float(total.mantissa), int(total.exponent)).to_float() == pytest.approx(
        expected, rel=1e-12
    )


def test_aligned_sum_beyond_float_range():
    total = aligned_sum(np.array([[1.0, 1.0]]), np.array([[5000, 5000]]), axis=1)
    assert total[0] == ScaledValue(1.0, 5001)


def test_aligned_sum_of_zeros_is_zero():
    total = aligned_sum(np.zeros((2, 3)), np.zeros((2, 3), dtype=np.int64), axis=1)
    assert total.is_zero().all()


def test_powers_sequence():
    assert ScaledArray.powers(2.0, 4).to_floats().tolist() == [1.0, 2.0, 4.0, 8.0]


def test_truncated_convolution():
    left = ScaledArray.from_floats([1.0, 2.0])
    right = ScaledArray.from_floats([1.0, 3.0, 5.0])
    assert convolve(left, right, 4).to_floats().tolist() == [1.0, 5.0, 11.0, 10.0]


def test_convolution_with_empty_operand():
    result = convolve(ScaledArray.zeros(0), ScaledArray.from_floats([1.0]), 3)
    assert result.to_floats().tolist() == [0.0, 0.0, 0.0]


def test_array_indexing():
    array = ScaledArray.from_floats([1.0, 6.0, 0.0])
    assert isinstance(array[1], ScaledValue)
    assert array[1].to_float() == 6.0
    assert isinstance(array[1:], ScaledArray)
    assert len(array[1:]) == 2
    assert array.is_zero().tolist() == [False, False, True]


def test_array_ratio_against_scalar():
    array = ScaledArray.from_floats([1.0, 2.0])
    assert array.ratio(ScaledValue.from_float(4.0)).tolist() == [0.25, 0.5]
    with pytest.raises(ZeroDivisionError):
        array.ratio(ScaledValue())
