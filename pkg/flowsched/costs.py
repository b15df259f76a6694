"""
COST ARITHMETIC
Exact rational costs for integer exponents, certified high-precision
decimals for fractional ones
"""
import math
import logging
from decimal import Context, Decimal, ROUND_HALF_EVEN, localcontext
from fractions import Fraction
from typing import Iterable, Union

from .config import DECIMAL_PRECISION
from .models import Time

logger = logging.getLogger(__name__)

Cost = Union[Fraction, Decimal]

_CONTEXT = Context(prec=DECIMAL_PRECISION, rounding=ROUND_HALF_EVEN)

# relative slack when a comparison involves a rounded decimal
COMPARISON_MARGIN = Decimal(2) ** -64

# resolution of rational lower approximations of x^(u/v)
ROOT_RESOLUTION = 1 << 32


def is_exact(p: Fraction) -> bool:
    return Fraction(p).denominator == 1


def to_decimal(value: Union[Cost, int]) -> Decimal:
    with localcontext(_CONTEXT):
        if isinstance(value, Decimal):
            return +value
        value = Fraction(value)
        return Decimal(value.numerator) / Decimal(value.denominator)


def zero_cost(p: Fraction) -> Cost:
    return Fraction(0) if is_exact(p) else Decimal(0)


def flow_power(flow: Time, p: Fraction) -> Cost:
    """flow^p, exact when p is an integer"""
    flow = Fraction(flow)
    p = Fraction(p)
    if p.denominator == 1:
        return flow ** p.numerator
    if flow == 0:
        return Decimal(0)
    with localcontext(_CONTEXT):
        return to_decimal(flow) ** to_decimal(p)


def weighted_cost(w: int, flow: Time, p: Fraction) -> Cost:
    return w * flow_power(flow, p)


def total_cost(costs: Iterable[Cost], p: Fraction) -> Cost:
    total = zero_cost(p)
    with localcontext(_CONTEXT):
        for cost in costs:
            total = total + cost
    return total


def p_root(total: Cost, p: Fraction) -> Decimal:
    """total^(1/p), the reported norm"""
    p = Fraction(p)
    with localcontext(_CONTEXT):
        value = to_decimal(total)
        if p == 1 or value == 0:
            return value
        return value ** (Decimal(p.denominator) / Decimal(p.numerator))


def certified_le(a: Cost, b: Cost) -> bool:
    """a <= b, exact for rationals and within COMPARISON_MARGIN otherwise"""
    if isinstance(a, Fraction) and isinstance(b, Fraction):
        return a <= b
    with localcontext(_CONTEXT):
        left, right = to_decimal(a), to_decimal(b)
        return left <= right + COMPARISON_MARGIN * max(Decimal(1), abs(right))


def integer_root(x: int, k: int) -> int:
    """floor(x^(1/k)) for integers x >= 0, k >= 1"""
    if x < 0 or k < 1:
        raise ValueError(f"integer_root needs x >= 0 and k >= 1, got {x}, {k}")
    if x < 2 or k == 1:
        return x
    if k == 2:
        return math.isqrt(x)
    guess = 1 << -(-x.bit_length() // k)
    while True:
        step = ((k - 1) * guess + x // guess ** (k - 1)) // k
        if step >= guess:
            return guess
        guess = step


def floor_units(w: int, flow: Time, p: Fraction, unit: Fraction) -> int:
    """floor(w * flow^p / unit), exact for rational p = u/v"""
    p = Fraction(p)
    scaled = Fraction(w) / unit
    flow = Fraction(flow)
    u, v = p.numerator, p.denominator
    if v == 1:
        value = scaled * flow ** u
        return value.numerator // value.denominator
    value = scaled ** v * flow ** u
    return integer_root(value.numerator // value.denominator, v)


def lower_power(x: int, p: Fraction) -> Fraction:
    """Rational value never above x^p, exact for integer p"""
    p = Fraction(p)
    u, v = p.numerator, p.denominator
    if v == 1:
        return Fraction(x ** u)
    return Fraction(integer_root(x ** u * ROOT_RESOLUTION ** v, v), ROOT_RESOLUTION)


def approximation_factor(p: Fraction) -> Cost:
    """2^p + 4^p / (4^p - 3^p)"""
    p = Fraction(p)
    two, three, four = flow_power(2, p), flow_power(3, p), flow_power(4, p)
    with localcontext(_CONTEXT):
        return two + four / (four - three)


def poly_guarantee(p: Fraction, epsilon: Fraction) -> Cost:
    """Ratio bound of the budgeted DP on the p-norm: factor^(1/p) + epsilon"""
    p = Fraction(p)
    factor = approximation_factor(p)
    if p == 1:
        return factor + Fraction(epsilon)
    with localcontext(_CONTEXT):
        return p_root(factor, p) + to_decimal(Fraction(epsilon))


def norm_ratio(objective: Cost, optimum: Cost, p: Fraction) -> Cost:
    """Ratio of p-norms, exact for p = 1"""
    p = Fraction(p)
    if p == 1 and isinstance(objective, Fraction) and isinstance(optimum, Fraction):
        return objective / optimum
    with localcontext(_CONTEXT):
        return p_root(objective, p) / p_root(optimum, p)


def render(value: Cost, places: int = 6) -> str:
    """Fixed-point rendering used next to the exact value in reports"""
    with localcontext(_CONTEXT):
        return str(to_decimal(value).quantize(Decimal(1).scaleb(-places)))


def exact_text(value: Cost) -> str:
    return str(value)
