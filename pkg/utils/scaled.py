"""
缩放浮点模块

归一化常数 g(n, m) 随人口数按 Y_i^k 几何增长或衰减，很快超出 float64 的表示范围。
这里用 (尾数, 二进制指数) 对表示数值：value = mantissa · 2**exponent，
其中 |mantissa| ∈ [1, 2)，零表示为 (0, 0)。

- ScaledValue: 标量，用于顺序递推与 Oracle 累加
- ScaledArray: 基于 numpy 的向量形式，用于按列的卷积计算
"""

import math
from dataclasses import dataclass
from typing import Iterable, Optional, Union

import numpy as np


# ldexp 的位移低于该值时结果必然下溢为 0
_MIN_SHIFT = -1100
_MAX_SHIFT = 1100
# 对齐求和时零元素使用的指数哨兵
_ZERO_EXPONENT = np.iinfo(np.int64).min // 4


def _normalize(mantissa: float, exponent: int) -> tuple:
    if mantissa == 0.0:
        return 0.0, 0
    m, e = math.frexp(mantissa)
    return m * 2.0, exponent + e - 1


@dataclass(frozen=True)
class ScaledValue:
    """
    缩放标量

    Attributes:
        mantissa: 尾数，|mantissa| ∈ [1, 2) 或 0
        exponent: 二进制指数
    """
    mantissa: float = 0.0
    exponent: int = 0

    def __post_init__(self):
        if not math.isfinite(self.mantissa):
            raise ValueError(f"尾数必须是有限值: {self.mantissa!r}")
        m, e = _normalize(float(self.mantissa), int(self.exponent))
        object.__setattr__(self, 'mantissa', m)
        object.__setattr__(self, 'exponent', e)

    @classmethod
    def from_float(cls, value: float) -> 'ScaledValue':
        """
        从普通浮点数创建

        Args:
            value: 有限浮点数

        Returns:
            ScaledValue: 缩放值
        """
        return cls(float(value), 0)

    @classmethod
    def one(cls) -> 'ScaledValue':
        return cls(1.0, 0)

    @classmethod
    def power(cls, base: float, k: int) -> 'ScaledValue':
        """
        计算 base**k，指数部分单独累加，不会溢出

        Args:
            base: 非负底数
            k: 非负整数幂次（k=0 时返回 1，包括 base=0）

        Returns:
            ScaledValue: base**k
        """
        if k < 0:
            raise ValueError(f"幂次必须非负: {k}")
        result = cls.one()
        factor = cls.from_float(base)
        while k:
            if k & 1:
                result = result * factor
            factor = factor * factor
            k >>= 1
        return result

    @classmethod
    def sum(cls, values: Iterable['ScaledValue']) -> 'ScaledValue':
        """
        对齐到最大指数后用 math.fsum 精确累加

        Args:
            values: 缩放值序列

        Returns:
            ScaledValue: 总和
        """
        items = [v for v in values if not v.is_zero]
        if not items:
            return cls()
        reference = max(v.exponent for v in items)
        total = math.fsum(
            math.ldexp(v.mantissa, max(v.exponent - reference, _MIN_SHIFT)) for v in items
        )
        return cls(total, reference)

    @property
    def is_zero(self) -> bool:
        return self.mantissa == 0.0

    def to_float(self) -> float:
        """
        转换为普通浮点数（超出范围时返回 ±inf 或 0）

        Returns:
            float: 数值
        """
        try:
            return math.ldexp(self.mantissa, self.exponent)
        except OverflowError:
            return math.copysign(math.inf, self.mantissa)

    def ratio(self, other: 'ScaledValue') -> float:
        """
        计算 self / other 并返回普通浮点数

        先做指数相减再做尾数除法，因此两个都超出 float64 范围的数之比仍然精确。

        Args:
            other: 除数

        Returns:
            float: 比值

        Raises:
            ZeroDivisionError: 如果除数为 0
        """
        if other.is_zero:
            raise ZeroDivisionError("缩放值除以 0")
        if self.is_zero:
            return 0.0
        return ScaledValue(self.mantissa / other.mantissa, self.exponent - other.exponent).to_float()

    def _coerce(self, other: Union['ScaledValue', float, int]) -> 'ScaledValue':
        if isinstance(other, ScaledValue):
            return other
        return ScaledValue.from_float(other)

    def __mul__(self, other: Union['ScaledValue', float, int]) -> 'ScaledValue':
        other = self._coerce(other)
        return ScaledValue(self.mantissa * other.mantissa, self.exponent + other.exponent)

    __rmul__ = __mul__

    def __truediv__(self, other: Union['ScaledValue', float, int]) -> 'ScaledValue':
        other = self._coerce(other)
        if other.is_zero:
            raise ZeroDivisionError("缩放值除以 0")
        return ScaledValue(self.mantissa / other.mantissa, self.exponent - other.exponent)

    def __add__(self, other: Union['ScaledValue', float, int]) -> 'ScaledValue':
        other = self._coerce(other)
        if other.is_zero:
            return self
        if self.is_zero:
            return other
        reference = max(self.exponent, other.exponent)
        total = (math.ldexp(self.mantissa, max(self.exponent - reference, _MIN_SHIFT))
                 + math.ldexp(other.mantissa, max(other.exponent - reference, _MIN_SHIFT)))
        return ScaledValue(total, reference)

    __radd__ = __add__

    def __neg__(self) -> 'ScaledValue':
        return ScaledValue(-self.mantissa, self.exponent)

    def __sub__(self, other: Union['ScaledValue', float, int]) -> 'ScaledValue':
        return self + (-self._coerce(other))

    def __repr__(self) -> str:
        return f"ScaledValue({self.mantissa!r} * 2**{self.exponent})"


def relative_difference(a: ScaledValue, b: ScaledValue) -> float:
    """
    |a - b| / max(|a|, |b|)，两者都为 0 时返回 0

    Args:
        a: 缩放值
        b: 缩放值

    Returns:
        float: 相对差
    """
    if a.is_zero and b.is_zero:
        return 0.0
    magnitudes = [ScaledValue(abs(v.mantissa), v.exponent) for v in (a, b) if not v.is_zero]
    scale = max(magnitudes, key=lambda v: (v.exponent, v.mantissa))
    return abs((a - b).ratio(scale))


@dataclass(frozen=True)
class ScaledArray:
    """
    缩放向量（numpy 实现）

    Attributes:
        mantissa: float64 尾数数组
        exponent: int64 指数数组
    """
    mantissa: np.ndarray
    exponent: np.ndarray

    @classmethod
    def normalized(cls, mantissa: np.ndarray, exponent: np.ndarray) -> 'ScaledArray':
        """
        由任意 (尾数, 指数) 数组构造并归一化

        Args:
            mantissa: 尾数数组（可含 0，不可含 inf/nan）
            exponent: 指数数组

        Returns:
            ScaledArray: 归一化后的数组
        """
        mantissa = np.asarray(mantissa, dtype=np.float64)
        m, e = np.frexp(mantissa)
        zero = mantissa == 0.0
        m = np.where(zero, 0.0, m * 2.0)
        e = np.where(zero, 0, np.asarray(exponent, dtype=np.int64) + e.astype(np.int64) - 1)
        return cls(m, e.astype(np.int64))

    @classmethod
    def from_floats(cls, values: Iterable[float]) -> 'ScaledArray':
        values = np.asarray(list(values) if not isinstance(values, np.ndarray) else values,
                            dtype=np.float64)
        return cls.normalized(values, np.zeros(values.shape, dtype=np.int64))

    @classmethod
    def from_values(cls, values: Iterable[ScaledValue]) -> 'ScaledArray':
        values = list(values)
        return cls(
            np.array([v.mantissa for v in values], dtype=np.float64),
            np.array([v.exponent for v in values], dtype=np.int64),
        )

    @classmethod
    def zeros(cls, length: int) -> 'ScaledArray':
        return cls(np.zeros(length, dtype=np.float64), np.zeros(length, dtype=np.int64))

    @classmethod
    def unit(cls, length: int) -> 'ScaledArray':
        """长度为 length 的 (1, 0, 0, ...)"""
        array = cls.zeros(length)
        if length:
            array.mantissa[0] = 1.0
        return array

    @classmethod
    def powers(cls, base: float, count: int) -> 'ScaledArray':
        """
        (base^0, base^1, ..., base^(count-1))

        Args:
            base: 非负底数
            count: 项数

        Returns:
            ScaledArray: 幂序列
        """
        values = []
        current = ScaledValue.one()
        factor = ScaledValue.from_float(base)
        for _ in range(count):
            values.append(current)
            current = current * factor
        return cls.from_values(values)

    def __len__(self) -> int:
        return int(self.mantissa.shape[0])

    def __getitem__(self, index):
        if isinstance(index, slice):
            return ScaledArray(self.mantissa[index], self.exponent[index])
        return ScaledValue(float(self.mantissa[index]), int(self.exponent[index]))

    def values(self) -> list:
        return [self[i] for i in range(len(self))]

    def to_floats(self) -> np.ndarray:
        """转换为 float64 数组（超出范围时为 inf 或 0）"""
        with np.errstate(over='ignore', under='ignore'):
            shift = np.clip(self.exponent, -2 * _MAX_SHIFT, 2 * _MAX_SHIFT).astype(np.int32)
            return np.ldexp(self.mantissa, shift)

    def ratio(self, other: Union['ScaledArray', ScaledValue]) -> np.ndarray:
        """
        逐元素计算 self / other，返回 float64 数组

        Args:
            other: 同长度的缩放数组或缩放标量（除数不可为 0）

        Returns:
            np.ndarray: 比值数组
        """
        if isinstance(other, ScaledValue):
            om = np.full(self.mantissa.shape, other.mantissa)
            oe = np.full(self.exponent.shape, other.exponent, dtype=np.int64)
        else:
            om, oe = other.mantissa, other.exponent
        if np.any(om == 0.0):
            raise ZeroDivisionError("缩放数组除以 0")
        with np.errstate(over='ignore', under='ignore'):
            shift = np.clip(self.exponent - oe, -2 * _MAX_SHIFT, 2 * _MAX_SHIFT).astype(np.int32)
            return np.ldexp(self.mantissa / om, shift)

    def scale(self, factor: float) -> 'ScaledArray':
        """整体乘以普通浮点数"""
        return ScaledArray.normalized(self.mantissa * factor, self.exponent)

    def is_zero(self) -> np.ndarray:
        return self.mantissa == 0.0


def aligned_sum(mantissa: np.ndarray, exponent: np.ndarray, axis: int = -1,
                reference: Optional[np.ndarray] = None) -> ScaledArray:
    """
    沿 axis 对缩放项求和

    每一组先对齐到同一参考指数（默认取组内非零项的最大指数）再相加。
    显式传入的 reference 必须不小于组内各项的量级，否则可能溢出。

    Args:
        mantissa: 项的尾数
        exponent: 项的指数
        axis: 求和轴
        reference: 每组的参考指数（可选）

    Returns:
        ScaledArray: 各组之和
    """
    mantissa = np.asarray(mantissa, dtype=np.float64)
    exponent = np.asarray(exponent, dtype=np.int64)
    nonzero = mantissa != 0.0
    if reference is None:
        effective = np.where(nonzero, exponent, _ZERO_EXPONENT)
        reference = effective.max(axis=axis)
        reference = np.where(reference == _ZERO_EXPONENT, 0, reference)
    reference = np.asarray(reference, dtype=np.int64)
    shift = exponent - np.expand_dims(reference, axis)
    shift = np.where(nonzero, shift, 0)
    shift = np.clip(shift, _MIN_SHIFT, _MAX_SHIFT).astype(np.int32)
    with np.errstate(under='ignore'):
        total = np.ldexp(mantissa, shift).sum(axis=axis)
    return ScaledArray.normalized(total, reference)


def convolve(left: ScaledArray, right: ScaledArray, length: int,
             reference: Optional[np.ndarray] = None) -> ScaledArray:
    """
    截断卷积 out[n] = Σ_{k=0}^{n} left[k] · right[n-k]，n = 0..length-1

    Args:
        left: 左操作数
        right: 右操作数
        length: 输出长度
        reference: 每个 n 的参考指数（可选，见 aligned_sum）

    Returns:
        ScaledArray: 卷积结果
    """
    width = min(len(left), length)
    if width == 0 or len(right) == 0:
        return ScaledArray.zeros(length)
    n_index = np.arange(length)[:, None]
    k_index = np.arange(width)[None, :]
    j_index = n_index - k_index
    valid = (j_index >= 0) & (j_index < len(right))
    j_index = np.where(valid, j_index, 0)
    mantissa = np.where(valid, left.mantissa[None, :width] * right.mantissa[j_index], 0.0)
    exponent = left.exponent[None, :width] + right.exponent[j_index]
    return aligned_sum(mantissa, exponent, axis=1, reference=reference)
