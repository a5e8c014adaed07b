"""Configurable-precision floating point with exact integer internals.

Values are sign/significand/exponent triples over an arbitrary integer radix.
The exponent is unbounded, so there is no overflow, underflow, subnormal,
infinity or NaN. Every operation computes the exact result with Python
integers and then rounds it to ``precision_digits`` significant digits,
either by plain truncation (dropped digits vanish, no carry) or, for radix 2,
by IEEE-style round-to-nearest-even.

Canonical form: zero is ``(+, 0, 0)``; nonzero significands carry no trailing
zero digits (those live in the exponent) and have at most ``P`` digits.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple

__all__ = [
    "DIGITS",
    "FloatFormat",
    "FloatValue",
    "NotAnInteger",
    "Rounding",
    "ZERO",
    "add",
    "from_integer",
    "make",
    "mul",
    "neg",
    "power_of_radix",
    "render_digits",
    "sub",
    "to_fraction",
    "to_integer",
]

DIGITS = "0123456789abcdefghijklmnopqrstuvwxyz"


class NotAnInteger(ValueError):
    """The value has a nonzero fractional part."""


class Rounding(str, enum.Enum):
    TRUNCATE = "trunc"
    NEAREST_EVEN = "rne"


@dataclass(frozen=True, slots=True)
class FloatFormat:
    """Radix, significant digit count ``P`` and rounding rule.

    For radix 2, ``P = z + 1`` where ``z`` is the stored mantissa width
    (hidden-bit convention), so IEEE binary32 is ``P = 24``.
    """

    radix: int = 2
    precision_digits: int = 24
    rounding: Rounding = Rounding.TRUNCATE
    nearest_even: bool = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if not isinstance(self.radix, int) or self.radix < 2:
            raise ValueError(f"radix must be an integer >= 2, got {self.radix!r}")
        if not isinstance(self.precision_digits, int) or self.precision_digits < 1:
            raise ValueError(
                f"precision_digits must be an integer >= 1, got {self.precision_digits!r}"
            )
        object.__setattr__(self, "rounding", Rounding(self.rounding))
        if self.rounding is Rounding.NEAREST_EVEN and self.radix != 2:
            raise ValueError("round-to-nearest-even is only defined for radix 2")
        object.__setattr__(self, "nearest_even", self.rounding is Rounding.NEAREST_EVEN)

    @classmethod
    def binary(cls, z: int = 23, rounding: Rounding | str = Rounding.TRUNCATE) -> FloatFormat:
        """Binary format with ``z`` stored mantissa bits."""
        return cls(2, z + 1, Rounding(rounding))

    @classmethod
    def binary32(cls) -> FloatFormat:
        return cls(2, 24, Rounding.NEAREST_EVEN)

    @property
    def z(self) -> int | None:
        return self.precision_digits - 1 if self.radix == 2 else None

    @property
    def limit(self) -> int:
        """``radix ** precision_digits``: first integer needing P+1 digits."""
        return _limit(self.radix, self.precision_digits)


_LOG2 = math.log(2)

_LIMITS: dict[tuple[int, int], int] = {}


def _limit(radix: int, digits: int) -> int:
    key = (radix, digits)
    value = _LIMITS.get(key)
    if value is None:
        value = radix**digits
        if len(_LIMITS) < 4096:
            _LIMITS[key] = value
    return value


class FloatValue(NamedTuple):
    """Represents ``(-1)**negative * significand * radix**exponent``."""

    negative: bool
    significand: int
    exponent: int
    radix: int = 2

    def __repr__(self) -> str:
        sign = "-" if self.negative else ""
        return f"FloatValue({sign}{self.significand}*{self.radix}^{self.exponent})"

    @property
    def is_zero(self) -> bool:
        return self.significand == 0


ZERO = FloatValue(False, 0, 0, 2)

_new = tuple.__new__


def _zero(radix: int) -> FloatValue:
    return ZERO if radix == 2 else FloatValue(False, 0, 0, radix)


def _num_digits(x: int, radix: int) -> int:
    """Count radix digits of ``x > 0``."""
    if radix == 2:
        return x.bit_length()
    n = max(1, int((x.bit_length() - 1) * _LOG2 / math.log(radix)))
    while _limit(radix, n) <= x:
        n += 1
    while n > 1 and _limit(radix, n - 1) > x:
        n -= 1
    return n


def make(negative: bool, magnitude: int, exponent: int, fmt: FloatFormat) -> FloatValue:
    """Round the exact value ``±magnitude * radix**exponent`` into ``fmt``."""
    if magnitude == 0:
        return _zero(fmt.radix)
    if magnitude < 0:
        raise ValueError("magnitude must be nonnegative")
    radix = fmt.radix
    if radix == 2:
        return _round2(negative, magnitude, exponent, fmt)

    excess = _num_digits(magnitude, radix) - fmt.precision_digits
    if excess > 0:
        magnitude //= _limit(radix, excess)
        exponent += excess
    while True:
        q, rem = divmod(magnitude, radix)
        if rem:
            break
        magnitude = q
        exponent += 1
    return FloatValue(negative, magnitude, exponent, radix)


def from_integer(x: int, fmt: FloatFormat) -> FloatValue:
    """Embed an integer, rounding it when it has more than ``P`` digits.

    Negative integers are accepted and embedded symmetrically.
    """
    if x < 0:
        return make(True, -x, 0, fmt)
    return make(False, x, 0, fmt)


def power_of_radix(e: int, fmt: FloatFormat) -> FloatValue:
    """Exact ``radix ** e``."""
    return FloatValue(False, 1, e, fmt.radix)


def _check_radix(a: FloatValue, b: FloatValue, fmt: FloatFormat) -> None:
    for v in (a, b):
        if v.radix != fmt.radix and v.significand:
            raise ValueError(f"value has radix {v.radix}, format has radix {fmt.radix}")


def _round2(negative: bool, magnitude: int, exponent: int, fmt: FloatFormat) -> FloatValue:
    """Radix-2 fast path of :func:`make` for ``magnitude > 0``."""
    excess = magnitude.bit_length() - fmt.precision_digits
    if excess > 0:
        if fmt.nearest_even:
            # carries out of the dropped bits iff above half, or a tie with odd kept part
            magnitude = (magnitude + (1 << (excess - 1)) - 1 + (magnitude >> excess & 1)) >> excess
        else:
            magnitude >>= excess
        exponent += excess
    low = magnitude & -magnitude
    if low != 1:
        tz = low.bit_length() - 1
        magnitude >>= tz
        exponent += tz
    return _new(FloatValue, (negative, magnitude, exponent, 2))


def _adder(negate_b: bool):
    def op(a: FloatValue, b: FloatValue, fmt: FloatFormat) -> FloatValue:
        na, sa, ea, ra = a
        nb, sb, eb, rb = b
        if negate_b:
            nb = not nb
        radix = fmt.radix
        if ra != radix or rb != radix:
            _check_radix(a, b, fmt)
        if not sb:
            return make(na, sa, ea, fmt) if sa else _zero(radix)
        if not sa:
            return make(nb, sb, eb, fmt)
        if radix != 2:
            return _add_general(na, sa, ea, nb, sb, eb, fmt)
        # align on the smaller exponent so the sum is an exact integer
        if ea > eb:
            sa <<= ea - eb
            ea = eb
        elif eb > ea:
            sb <<= eb - ea
        if na == nb:
            total = sa + sb
            negative = na
        else:
            total = sb - sa if na else sa - sb
            if not total:
                return ZERO
            negative = total < 0
            if negative:
                total = -total
        # _round2 inlined; this is the hot path of every forward pass
        excess = total.bit_length() - fmt.precision_digits
        if excess > 0:
            if fmt.nearest_even:
                total = (total + (1 << (excess - 1)) - 1 + (total >> excess & 1)) >> excess
            else:
                total >>= excess
            ea += excess
        low = total & -total
        if low != 1:
            tz = low.bit_length() - 1
            total >>= tz
            ea += tz
        return _new(FloatValue, (negative, total, ea, 2))

    return op


add = _adder(False)
add.__name__ = add.__qualname__ = "add"
add.__doc__ = "Exact ``a + b`` rounded to ``fmt``."

sub = _adder(True)
sub.__name__ = sub.__qualname__ = "sub"
sub.__doc__ = "Exact ``a - b`` rounded to ``fmt``; the result may be negative."


def _add_general(
    na: bool, sa: int, ea: int, nb: bool, sb: int, eb: int, fmt: FloatFormat
) -> FloatValue:
    radix = fmt.radix
    if ea > eb:
        sa *= _limit(radix, ea - eb)
        ea = eb
    elif eb > ea:
        sb *= _limit(radix, eb - ea)
    total = (-sa if na else sa) + (-sb if nb else sb)
    if total < 0:
        return make(True, -total, ea, fmt)
    return make(False, total, ea, fmt)


def neg(a: FloatValue) -> FloatValue:
    if not a.significand:
        return a
    return FloatValue(not a.negative, a.significand, a.exponent, a.radix)


def mul(a: FloatValue, b: FloatValue, fmt: FloatFormat) -> FloatValue:
    """Exact ``a * b`` rounded to ``fmt``; exact when a factor is a power of the radix."""
    na, sa, ea, ra = a
    nb, sb, eb, rb = b
    radix = fmt.radix
    if ra != radix or rb != radix:
        _check_radix(a, b, fmt)
    if not sa or not sb:
        return _zero(radix)
    if radix != 2:
        return make(na != nb, sa * sb, ea + eb, fmt)
    product = sa * sb
    ea += eb
    excess = product.bit_length() - fmt.precision_digits
    if excess > 0:
        if fmt.nearest_even:
            product = (product + (1 << (excess - 1)) - 1 + (product >> excess & 1)) >> excess
        else:
            product >>= excess
        ea += excess
    low = product & -product
    if low != 1:
        tz = low.bit_length() - 1
        product >>= tz
        ea += tz
    return _new(FloatValue, (na != nb, product, ea, 2))


def to_fraction(v: FloatValue) -> Fraction:
    if v.exponent >= 0:
        value = Fraction(v.significand * v.radix**v.exponent)
    else:
        value = Fraction(v.significand, v.radix**-v.exponent)
    return -value if v.negative else value


def to_integer(v: FloatValue) -> int:
    """Exact integer value of ``v``; raises :class:`NotAnInteger` otherwise."""
    if v.exponent >= 0:
        value = v.significand * v.radix**v.exponent
    else:
        q, rem = divmod(v.significand, v.radix**-v.exponent)
        if rem:
            raise NotAnInteger(f"{v!r} has a fractional part")
        value = q
    return -value if v.negative else value


def render_digits(v: FloatValue, fmt: FloatFormat, group: int) -> str:
    """Radix digits of a nonnegative integer value in zero-padded groups.

    >>> render_digits(from_integer(211, FloatFormat(2, 10)), FloatFormat(2, 10), 3)
    '011 010 011'
    """
    if group < 1:
        raise ValueError("group must be >= 1")
    value = to_integer(v)
    if value < 0:
        raise ValueError("render_digits needs a nonnegative value")
    radix = fmt.radix
    if radix > len(DIGITS):
        raise ValueError(f"cannot render radix {radix} with single-character digits")
    digits = []
    while value:
        value, d = divmod(value, radix)
        digits.append(DIGITS[d])
    pad = -len(digits) % group if digits else group
    digits.extend("0" * pad)
    text = "".join(reversed(digits))
    return " ".join(text[i : i + group] for i in range(0, len(text), group))
