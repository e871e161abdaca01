"""Exact dyadic rationals ``m * 2^e`` and the rounding primitives built on them."""
from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum, IntEnum
from fractions import Fraction

from .exceptions import DyadicSyntaxError, ExponentOverflowError, NotDyadicError
from .utils.backend import isqrt
from .utils.costs import charge

EXPONENT_LIMIT = 2**31
NEAREST_HINT_BITS = 32

_LITERAL = re.compile(
    r"""
    ^\s*(?P<sign>[+-])?\s*
    (?:
        (?P<num>\d+)\s*/\s*2\s*\^\s*(?P<den>\d+)
      | (?P<mant>\d+)\s*\*\s*2\s*\^\s*(?P<exp>[+-]?\d+)
      | (?P<dec>\d+\.\d*|\.\d+)
      | (?P<int>\d+)
    )\s*$
    """,
    re.VERBOSE,
)


class Ordering(IntEnum):
    LESS = -1
    EQUAL = 0
    GREATER = 1


class Op(str, Enum):
    ADD = "add"
    SUB = "sub"
    MUL = "mul"


@dataclass(frozen=True, slots=True)
class Dyadic:
    """The value ``mantissa * 2**exponent``, always stored in canonical form.

    Canonical form has an odd mantissa, or mantissa 0 with exponent 0, so
    structural equality is value equality.
    """

    mantissa: int
    exponent: int = 0

    def __post_init__(self) -> None:
        m, e = int(self.mantissa), int(self.exponent)
        if m == 0:
            e = 0
        else:
            zeros = (m & -m).bit_length() - 1
            if zeros:
                m >>= zeros
                e += zeros
        if abs(e) > EXPONENT_LIMIT:
            raise ExponentOverflowError(f"exponent {e} outside +-2^31")
        object.__setattr__(self, "mantissa", m)
        object.__setattr__(self, "exponent", e)

    @classmethod
    def of(cls, value: Dyadic | int) -> Dyadic:
        if isinstance(value, Dyadic):
            return value
        if isinstance(value, int):
            return cls(value)
        raise TypeError(f"cannot convert {type(value).__name__} to Dyadic")

    @classmethod
    def from_fraction(cls, value: Fraction) -> Dyadic:
        den = value.denominator
        if den & (den - 1):
            raise NotDyadicError(f"{value} is not a dyadic rational")
        return cls(value.numerator, -(den.bit_length() - 1))

    # -- inspection -------------------------------------------------------

    @property
    def sign(self) -> int:
        return (self.mantissa > 0) - (self.mantissa < 0)

    def is_zero(self) -> bool:
        return self.mantissa == 0

    def bit_length(self) -> int:
        return self.mantissa.bit_length()

    def floor_log2(self) -> int:
        """Largest t with 2^t <= |self|."""
        if self.mantissa == 0:
            raise ValueError("log2 of zero")
        return self.mantissa.bit_length() - 1 + self.exponent

    def ceil_log2(self) -> int:
        """Smallest t with |self| <= 2^t."""
        t = self.floor_log2()
        return t if abs(self.mantissa) == 1 else t + 1

    def floor(self) -> int:
        if self.exponent >= 0:
            return self.mantissa << self.exponent
        return self.mantissa >> -self.exponent

    def ceil(self) -> int:
        return -(-self).floor()

    def to_fraction(self) -> Fraction:
        if self.exponent >= 0:
            return Fraction(self.mantissa << self.exponent)
        return Fraction(self.mantissa, 1 << -self.exponent)

    def __float__(self) -> float:
        return float(self.to_fraction())

    # -- arithmetic -------------------------------------------------------

    def __add__(self, other: Dyadic | int) -> Dyadic:
        if not isinstance(other, (Dyadic, int)):
            return NotImplemented
        return exact_arith(self, other, Op.ADD)

    __radd__ = __add__

    def __sub__(self, other: Dyadic | int) -> Dyadic:
        if not isinstance(other, (Dyadic, int)):
            return NotImplemented
        return exact_arith(self, other, Op.SUB)

    def __rsub__(self, other: Dyadic | int) -> Dyadic:
        if not isinstance(other, (Dyadic, int)):
            return NotImplemented
        return exact_arith(other, self, Op.SUB)

    def __mul__(self, other: Dyadic | int) -> Dyadic:
        if not isinstance(other, (Dyadic, int)):
            return NotImplemented
        return exact_arith(self, other, Op.MUL)

    __rmul__ = __mul__

    def __pow__(self, power: int) -> Dyadic:
        if not isinstance(power, int) or power < 0:
            return NotImplemented
        result = Dyadic(1)
        for _ in range(power):
            result = result * self
        return result

    def __neg__(self) -> Dyadic:
        return Dyadic(-self.mantissa, self.exponent)

    def __abs__(self) -> Dyadic:
        return self if self.mantissa >= 0 else -self

    def shift(self, k: int) -> Dyadic:
        """Multiply by 2^k exactly."""
        return Dyadic(self.mantissa, self.exponent + k)

    # -- ordering ---------------------------------------------------------

    def __lt__(self, other: Dyadic | int) -> bool:
        return compare(self, other) is Ordering.LESS

    def __le__(self, other: Dyadic | int) -> bool:
        return compare(self, other) is not Ordering.GREATER

    def __gt__(self, other: Dyadic | int) -> bool:
        return compare(self, other) is Ordering.GREATER

    def __ge__(self, other: Dyadic | int) -> bool:
        return compare(self, other) is not Ordering.LESS

    # -- text -------------------------------------------------------------

    def __str__(self) -> str:
        return format_dyadic(self)

    def __repr__(self) -> str:
        return f"Dyadic({format_dyadic(self)!r})"

    def to_decimal(self) -> str:
        """Exact decimal expansion (every dyadic has a finite one)."""
        if self.exponent >= 0:
            return str(self.mantissa << self.exponent)
        places = -self.exponent
        digits = str(abs(self.mantissa) * 5**places).rjust(places + 1, "0")
        sign = "-" if self.mantissa < 0 else ""
        return f"{sign}{digits[:-places]}.{digits[-places:]}"


ZERO = Dyadic(0)
ONE = Dyadic(1)


def ulp(n: int) -> Dyadic:
    """2^-n."""
    return Dyadic(1, -n)


def _aligned(a: Dyadic, b: Dyadic) -> tuple[int, int, int]:
    e = min(a.exponent, b.exponent)
    return a.mantissa << (a.exponent - e), b.mantissa << (b.exponent - e), e


def exact_arith(a: Dyadic | int, b: Dyadic | int, op: Op | str) -> Dyadic:
    a, b, op = Dyadic.of(a), Dyadic.of(b), Op(op)
    if op is Op.MUL:
        charge(max(1, a.bit_length()) * max(1, b.bit_length()))
        return Dyadic(a.mantissa * b.mantissa, a.exponent + b.exponent)
    ma, mb, e = _aligned(a, b)
    charge(max(ma.bit_length(), mb.bit_length(), 1))
    return Dyadic(ma + mb if op is Op.ADD else ma - mb, e)


def compare(a: Dyadic | int, b: Dyadic | int) -> Ordering:
    a, b = Dyadic.of(a), Dyadic.of(b)
    if a.sign != b.sign:
        return Ordering.LESS if a.sign < b.sign else Ordering.GREATER
    ma, mb, _ = _aligned(a, b)
    if ma == mb:
        return Ordering.EQUAL
    return Ordering.LESS if ma < mb else Ordering.GREATER


def _shift_round_nearest(m: int, s: int) -> int:
    """round(m / 2^s) for s > 0, ties away from zero."""
    half = 1 << (s - 1)
    if m >= 0:
        return (m + half) >> s
    return -((-m + half) >> s)


def round_to(x: Dyadic, n: int) -> Dyadic:
    """Nearest multiple of 2^-n, ties away from zero."""
    if n < 0:
        raise ValueError("precision must be non-negative")
    shift = -n - x.exponent
    if shift <= 0:
        return x
    charge(x.bit_length())
    return Dyadic(_shift_round_nearest(x.mantissa, shift), -n)


def round_down(x: Dyadic, p: int) -> Dyadic:
    """Largest multiple of 2^-p that is <= x."""
    shift = -p - x.exponent
    if shift <= 0:
        return x
    return Dyadic(x.mantissa >> shift, -p)


def round_up(x: Dyadic, p: int) -> Dyadic:
    """Smallest multiple of 2^-p that is >= x."""
    return -round_down(-x, p)


def round_fraction(value: Fraction, p: int) -> Dyadic:
    """Nearest multiple of 2^-p to a rational, ties away from zero."""
    scaled = value * (1 << p) if p >= 0 else value / (1 << -p)
    num, den = scaled.numerator, scaled.denominator
    q, r = divmod(abs(num), den)
    if 2 * r >= den:
        q += 1
    charge(max(num.bit_length(), den.bit_length()))
    return Dyadic(q if num >= 0 else -q, -p)


def _scaled_floor(value: Dyadic | Fraction, p: int) -> tuple[int, bool]:
    """floor(value * 4^p) and whether it was exact."""
    frac = value.to_fraction() if isinstance(value, Dyadic) else Fraction(value)
    scaled = frac * (1 << (2 * p)) if p >= 0 else frac / (1 << (-2 * p))
    q, r = divmod(scaled.numerator, scaled.denominator)
    return q, r == 0


def sqrt_floor(value: Dyadic | Fraction, p: int) -> Dyadic:
    """Largest multiple of 2^-p not exceeding sqrt(value)."""
    if value < 0:
        raise ValueError("square root of a negative number")
    n, _ = _scaled_floor(value, p)
    root = isqrt(n)
    charge(n.bit_length() ** 2 // 8 + 1)
    return Dyadic(root, -p)


def sqrt_ceil(value: Dyadic | Fraction, p: int) -> Dyadic:
    """Smallest multiple of 2^-p not below sqrt(value)."""
    if value < 0:
        raise ValueError("square root of a negative number")
    n, exact = _scaled_floor(value, p)
    root = isqrt(n)
    if not exact or root * root != n:
        root += 1
    charge(n.bit_length() ** 2 // 8 + 1)
    return Dyadic(root, -p)


def format_dyadic(x: Dyadic) -> str:
    return f"{x.mantissa}*2^{x.exponent}"


def parse_dyadic(text: str) -> Dyadic:
    """Parse ``m``, ``m/2^k``, ``m*2^e`` or a finite decimal into a Dyadic.

    Decimals are accepted only when their value is dyadic; otherwise the
    error names the nearest multiple of 2^-32.
    """
    match = _LITERAL.match(text)
    if match is None:
        raise DyadicSyntaxError(f"malformed dyadic literal: {text!r}")
    negative = match["sign"] == "-"
    if match["num"] is not None:
        value = Dyadic(int(match["num"]), -int(match["den"]))
    elif match["mant"] is not None:
        value = Dyadic(int(match["mant"]), int(match["exp"]))
    elif match["int"] is not None:
        value = Dyadic(int(match["int"]))
    else:
        frac = Fraction(match["dec"])
        den = frac.denominator
        if den & (den - 1):
            nearest = round_fraction(-frac if negative else frac, NEAREST_HINT_BITS)
            raise NotDyadicError(
                f"{text.strip()!r} is not a dyadic rational; "
                f"nearest multiple of 2^-{NEAREST_HINT_BITS} is {nearest} "
                f"({nearest.to_decimal()})"
            )
        value = Dyadic.from_fraction(frac)
    return -value if negative else value
