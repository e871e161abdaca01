"""Closed dyadic intervals, complex boxes and outward-rounded interval arithmetic."""
from __future__ import annotations

from dataclasses import dataclass

from .dyadic import (
    ZERO,
    Dyadic,
    Op,
    round_down,
    round_up,
    sqrt_ceil,
    sqrt_floor,
)

MAG_PRECISION = 32


@dataclass(frozen=True, slots=True)
class DyInterval:
    lo: Dyadic
    hi: Dyadic

    def __post_init__(self) -> None:
        lo, hi = Dyadic.of(self.lo), Dyadic.of(self.hi)
        if lo > hi:
            raise ValueError(f"empty interval [{lo}, {hi}]")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def point(cls, x: Dyadic | int) -> DyInterval:
        return cls(x, x)

    @classmethod
    def around(cls, x: Dyadic | int, radius: Dyadic | int) -> DyInterval:
        return cls(Dyadic.of(x) - radius, Dyadic.of(x) + radius)

    def width(self) -> Dyadic:
        return self.hi - self.lo

    def midpoint(self) -> Dyadic:
        return (self.lo + self.hi).shift(-1)

    def contains(self, x: Dyadic | int) -> bool:
        return self.lo <= x <= self.hi

    def issubset(self, other: DyInterval) -> bool:
        return other.lo <= self.lo and self.hi <= other.hi

    def intersects(self, other: DyInterval) -> bool:
        return self.lo <= other.hi and other.lo <= self.hi

    def intersection(self, other: DyInterval) -> DyInterval | None:
        lo, hi = max(self.lo, other.lo), min(self.hi, other.hi)
        return DyInterval(lo, hi) if lo <= hi else None

    def hull(self, other: DyInterval) -> DyInterval:
        return DyInterval(min(self.lo, other.lo), max(self.hi, other.hi))

    def inflate(self, radius: Dyadic) -> DyInterval:
        return DyInterval(self.lo - radius, self.hi + radius)

    def shift(self, k: int) -> DyInterval:
        return DyInterval(self.lo.shift(k), self.hi.shift(k))

    def clamp(self, x: Dyadic) -> Dyadic:
        if x < self.lo:
            return self.lo
        if x > self.hi:
            return self.hi
        return x

    def split(self) -> tuple[DyInterval, DyInterval]:
        mid = self.midpoint()
        return DyInterval(self.lo, mid), DyInterval(mid, self.hi)

    def mag(self) -> Dyadic:
        """Largest absolute value on the interval."""
        return max(abs(self.lo), abs(self.hi))

    def mig(self) -> Dyadic:
        """Smallest absolute value on the interval."""
        if self.contains(ZERO):
            return ZERO
        return min(abs(self.lo), abs(self.hi))

    def distance_to(self, x: Dyadic) -> Dyadic:
        if x < self.lo:
            return self.lo - x
        if x > self.hi:
            return x - self.hi
        return ZERO

    def round_out(self, p: int) -> DyInterval:
        return DyInterval(round_down(self.lo, p), round_up(self.hi, p))

    def __neg__(self) -> DyInterval:
        return DyInterval(-self.hi, -self.lo)

    def __add__(self, other: DyInterval | Dyadic | int) -> DyInterval:
        other = _as_interval(other)
        return DyInterval(self.lo + other.lo, self.hi + other.hi)

    __radd__ = __add__

    def __sub__(self, other: DyInterval | Dyadic | int) -> DyInterval:
        other = _as_interval(other)
        return DyInterval(self.lo - other.hi, self.hi - other.lo)

    def __rsub__(self, other: DyInterval | Dyadic | int) -> DyInterval:
        return _as_interval(other) - self

    def __mul__(self, other: DyInterval | Dyadic | int) -> DyInterval:
        other = _as_interval(other)
        products = (
            self.lo * other.lo,
            self.lo * other.hi,
            self.hi * other.lo,
            self.hi * other.hi,
        )
        return DyInterval(min(products), max(products))

    __rmul__ = __mul__

    def sqr(self) -> DyInterval:
        a, b = self.lo * self.lo, self.hi * self.hi
        if self.contains(ZERO):
            return DyInterval(ZERO, max(a, b))
        return DyInterval(min(a, b), max(a, b))

    def __str__(self) -> str:
        return f"[{self.lo}, {self.hi}]"


def _as_interval(value: DyInterval | Dyadic | int) -> DyInterval:
    if isinstance(value, DyInterval):
        return value
    return DyInterval.point(value)


def iv_arith(a: DyInterval, b: DyInterval, op: Op | str, p: int) -> DyInterval:
    """Exact endpoint arithmetic followed by a single outward rounding at 2^-p."""
    op = Op(op)
    if op is Op.ADD:
        exact = a + b
    elif op is Op.SUB:
        exact = a - b
    else:
        exact = a * b
    return exact.round_out(p)


def iv_sqr(a: DyInterval, p: int) -> DyInterval:
    return a.sqr().round_out(p)


@dataclass(frozen=True, slots=True)
class ComplexBox:
    """Axis-aligned box ``re x im``; also used for planar pixel regions."""

    re: DyInterval
    im: DyInterval

    @classmethod
    def point(cls, x: Dyadic | int, y: Dyadic | int) -> ComplexBox:
        return cls(DyInterval.point(x), DyInterval.point(y))

    @classmethod
    def around(cls, x: Dyadic | int, y: Dyadic | int, radius: Dyadic) -> ComplexBox:
        return cls(DyInterval.around(x, radius), DyInterval.around(y, radius))

    def width(self) -> Dyadic:
        return max(self.re.width(), self.im.width())

    def center(self) -> tuple[Dyadic, Dyadic]:
        return self.re.midpoint(), self.im.midpoint()

    def contains(self, x: Dyadic, y: Dyadic) -> bool:
        return self.re.contains(x) and self.im.contains(y)

    def issubset(self, other: ComplexBox) -> bool:
        return self.re.issubset(other.re) and self.im.issubset(other.im)

    def inflate(self, radius: Dyadic) -> ComplexBox:
        return ComplexBox(self.re.inflate(radius), self.im.inflate(radius))

    def hull(self, other: ComplexBox) -> ComplexBox:
        return ComplexBox(self.re.hull(other.re), self.im.hull(other.im))

    def round_out(self, p: int) -> ComplexBox:
        return ComplexBox(self.re.round_out(p), self.im.round_out(p))

    def split(self) -> tuple[ComplexBox, ComplexBox, ComplexBox, ComplexBox]:
        """Quadrants in a fixed order: lower-left, lower-right, upper-left, upper-right."""
        left, right = self.re.split()
        low, high = self.im.split()
        return (
            ComplexBox(left, low),
            ComplexBox(right, low),
            ComplexBox(left, high),
            ComplexBox(right, high),
        )

    def distance_squared_to(self, x: Dyadic, y: Dyadic) -> Dyadic:
        dx, dy = self.re.distance_to(x), self.im.distance_to(y)
        return dx * dx + dy * dy

    def mag_squared_bounds(self) -> tuple[Dyadic, Dyadic]:
        """Exact bounds on |z|^2 over the box."""
        lo_re, lo_im = self.re.mig(), self.im.mig()
        hi_re, hi_im = self.re.mag(), self.im.mag()
        return lo_re * lo_re + lo_im * lo_im, hi_re * hi_re + hi_im * hi_im

    def __str__(self) -> str:
        return f"{self.re} x {self.im}"


def box_step(z: ComplexBox, c: ComplexBox, p: int) -> ComplexBox:
    """Enclosure of {w^2 + gamma : w in z, gamma in c}, rounded once outward at 2^-p."""
    re = z.re.sqr() - z.im.sqr() + c.re
    im = (z.re * z.im).shift(1) + c.im
    return ComplexBox(re.round_out(p), im.round_out(p))


def mag_bounds(z: ComplexBox, p: int = MAG_PRECISION) -> tuple[Dyadic, Dyadic]:
    """Lower and upper bounds on |z| over the box, each within 2^-p."""
    lo2, hi2 = z.mag_squared_bounds()
    return sqrt_floor(lo2, p), sqrt_ceil(hi2, p)
