"""Koch snowflake, Mandelbrot set and quadratic Julia sets as pixel-computable sets.

Koch polygons are exact: coordinates live in Q(sqrt 3) and are only rounded
to dyadics, with certified error, when a distance is evaluated. Escape-time
sets are decided from interval iteration of whole pixel regions, so a 0
answer is always certified; a 1 answer is certified only where a separate
certificate (cardioid, attracting cycle, mixed samples) exists.
"""
from __future__ import annotations

import heapq
import itertools
import logging
import math
import random
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from typing import Callable

from .dyadic import ONE, ZERO, Dyadic, round_fraction, round_to, round_up, sqrt_ceil, sqrt_floor, ulp
from .exceptions import LevelCapExceeded
from .interval import ComplexBox, DyInterval, box_step
from .oracles import RealOracle
from .sets import (
    Diagnosis,
    DistOracle,
    PixelDecision,
    PixelSet,
    Point,
    Verdict,
    segment_distance_squared,
)

logger = logging.getLogger(__name__)

KOCH_MAX_LEVEL = 12
FOUR = Dyadic(4)
HALF = Fraction(1, 2)
THIRD = Fraction(1, 3)


# -- exact arithmetic in Q(sqrt 3) --------------------------------------------


@lru_cache(maxsize=64)
def _sqrt3_floor(q: int) -> Fraction:
    return sqrt_floor(Dyadic(3), q).to_fraction()


def _floor_at(value: Fraction, p: int) -> Dyadic:
    return Dyadic(math.floor(value * (1 << p)), -p)


def _ceil_at(value: Fraction, p: int) -> Dyadic:
    return Dyadic(math.ceil(value * (1 << p)), -p)


@dataclass(frozen=True, slots=True)
class Surd:
    """The number a + b * sqrt(3) with rational a and b."""

    a: Fraction
    b: Fraction = Fraction(0)

    def __post_init__(self) -> None:
        object.__setattr__(self, "a", Fraction(self.a))
        object.__setattr__(self, "b", Fraction(self.b))

    @staticmethod
    def _lift(other: Surd | Fraction | int) -> Surd:
        return other if isinstance(other, Surd) else Surd(Fraction(other))

    def __add__(self, other: Surd | Fraction | int) -> Surd:
        other = Surd._lift(other)
        return Surd(self.a + other.a, self.b + other.b)

    __radd__ = __add__

    def __sub__(self, other: Surd | Fraction | int) -> Surd:
        other = Surd._lift(other)
        return Surd(self.a - other.a, self.b - other.b)

    def __neg__(self) -> Surd:
        return Surd(-self.a, -self.b)

    def __mul__(self, other: Surd | Fraction | int) -> Surd:
        other = Surd._lift(other)
        return Surd(
            self.a * other.a + 3 * self.b * other.b,
            self.a * other.b + self.b * other.a,
        )

    __rmul__ = __mul__

    def __truediv__(self, other: Surd | Fraction | int) -> Surd:
        other = Surd._lift(other)
        norm = other.norm()
        if norm == 0:
            raise ZeroDivisionError("division by zero in Q(sqrt 3)")
        numerator = self * Surd(other.a, -other.b)
        return Surd(numerator.a / norm, numerator.b / norm)

    def times_sqrt3(self) -> Surd:
        return Surd(3 * self.b, self.a)

    def norm(self) -> Fraction:
        return self.a * self.a - 3 * self.b * self.b

    def sign(self) -> int:
        sa = (self.a > 0) - (self.a < 0)
        sb = (self.b > 0) - (self.b < 0)
        if sb == 0 or sa == sb:
            return sa or sb
        if sa == 0:
            return sb
        # opposite signs: the larger of a^2 and 3b^2 wins
        return sa if self.norm() > 0 else sb

    def __lt__(self, other: Surd | Fraction | int) -> bool:
        return (self - other).sign() < 0

    def __le__(self, other: Surd | Fraction | int) -> bool:
        return (self - other).sign() <= 0

    def __gt__(self, other: Surd | Fraction | int) -> bool:
        return (self - other).sign() > 0

    def __ge__(self, other: Surd | Fraction | int) -> bool:
        return (self - other).sign() >= 0

    def _sqrt3_bits(self, p: int) -> int:
        size = abs(self.b)
        extra = 0 if size <= 1 else math.ceil(math.log2(size)) + 1
        return p + 2 + extra

    def enclose(self, p: int) -> DyInterval:
        """Dyadic interval of width at most 2^-(p-1) containing the value."""
        q = self._sqrt3_bits(p)
        lo3 = _sqrt3_floor(q)
        hi3 = lo3 + Fraction(1, 1 << q)
        ends = (self.a + self.b * lo3, self.a + self.b * hi3)
        return DyInterval(_floor_at(min(ends), p), _ceil_at(max(ends), p))

    def approx(self, p: int) -> Dyadic:
        """A dyadic within 2^-p of the value."""
        q = self._sqrt3_bits(p)
        return round_fraction(self.a + self.b * _sqrt3_floor(q), p + 1)

    def __str__(self) -> str:
        return f"{self.a} + {self.b}*sqrt3"


SurdPoint = tuple[Surd, Surd]


@lru_cache(maxsize=1 << 16)
def _approx_point(point: SurdPoint, p: int) -> Point:
    return point[0].approx(p), point[1].approx(p)


def _surd_segment_distance_sq(point: SurdPoint, a: SurdPoint, b: SurdPoint) -> Surd:
    px, py = point
    dx, dy = b[0] - a[0], b[1] - a[1]
    length_sq = dx * dx + dy * dy
    t = ((px - a[0]) * dx + (py - a[1]) * dy) / length_sq
    if t < 0:
        t = Surd(0)
    elif t > 1:
        t = Surd(1)
    cx, cy = a[0] + t * dx, a[1] + t * dy
    return (px - cx) * (px - cx) + (py - cy) * (py - cy)


# -- Koch snowflake ----------------------------------------------------------------


@dataclass(frozen=True)
class KochApprox:
    level: int
    vertices: tuple[SurdPoint, ...]
    side: Fraction = Fraction(1)

    @property
    def edges(self) -> list[tuple[SurdPoint, SurdPoint]]:
        count = len(self.vertices)
        return [(self.vertices[i], self.vertices[(i + 1) % count]) for i in range(count)]

    @property
    def edge_length(self) -> Fraction:
        return self.side / 3**self.level

    def dyadic_vertices(self, p: int) -> list[Point]:
        return [_approx_point(v, p) for v in self.vertices]


def koch_triangle(side: Fraction = Fraction(1)) -> tuple[SurdPoint, ...]:
    """Equilateral triangle centred at the origin, apex up, listed counter-clockwise."""
    side = Fraction(side)
    apex = (Surd(0), Surd(0, side / 3))
    left = (Surd(-side / 2), Surd(0, -side / 6))
    right = (Surd(side / 2), Surd(0, -side / 6))
    return apex, left, right


def _subdivide(p: SurdPoint, q: SurdPoint) -> tuple[SurdPoint, SurdPoint, SurdPoint, SurdPoint]:
    """P, then the two third points and the outward bump apex of edge PQ."""
    dx, dy = (q[0] - p[0]) * THIRD, (q[1] - p[1]) * THIRD
    a = (p[0] + dx, p[1] + dy)
    b = (p[0] + 2 * dx, p[1] + 2 * dy)
    # the edge direction turned by -60 degrees points away from a counter-clockwise interior
    rx = dx * HALF + dy.times_sqrt3() * HALF
    ry = dy * HALF - dx.times_sqrt3() * HALF
    c = (a[0] + rx, a[1] + ry)
    return p, a, c, b


def _children(p: SurdPoint, q: SurdPoint) -> list[tuple[SurdPoint, SurdPoint]]:
    points = (*_subdivide(p, q), q)
    return [(points[i], points[i + 1]) for i in range(4)]


def koch_polygon(i: int, side: Fraction = Fraction(1), max_level: int = KOCH_MAX_LEVEL) -> KochApprox:
    if i < 0:
        raise ValueError("Koch level must be non-negative")
    if i > max_level:
        raise LevelCapExceeded(f"Koch level {i} exceeds cap {max_level}")
    vertices = list(koch_triangle(side))
    for _ in range(i):
        refined: list[SurdPoint] = []
        for j in range(len(vertices)):
            refined.extend(_subdivide(vertices[j], vertices[(j + 1) % len(vertices)]))
        vertices = refined
    return KochApprox(i, tuple(vertices), Fraction(side))


@dataclass(frozen=True)
class KochStep:
    """Bounds on the squared Hausdorff distance between K_i and K_(i+1)."""

    level: int
    lower_sq: Surd
    upper_sq: Surd

    @property
    def exact(self) -> bool:
        return self.lower_sq == self.upper_sq

    def enclose(self, p: int) -> DyInterval:
        lo, hi = self.lower_sq.enclose(p + 2), self.upper_sq.enclose(p + 2)
        return DyInterval(sqrt_floor(max(ZERO, lo.lo), p), sqrt_ceil(hi.hi, p))


def koch_step_hausdorff(i: int, probes: int = 4, max_level: int = KOCH_MAX_LEVEL) -> KochStep:
    """Hausdorff distance between consecutive Koch polygons, bracketed exactly.

    Upper bound: each edge e of K_i is replaced by four edges of K_(i+1)
    whose points are within the bump height of e, and every point of e is
    within |e|/6 of them. Lower bound: the bump apexes of the first few
    edges, measured against all of K_i.
    """
    polygon = koch_polygon(i, max_level=max_level)
    edges = polygon.edges
    upper = Surd(0)
    for p, q in edges:
        apex = _subdivide(p, q)[2]
        length_sq = (q[0] - p[0]) * (q[0] - p[0]) + (q[1] - p[1]) * (q[1] - p[1])
        candidate = max(_surd_segment_distance_sq(apex, p, q), length_sq / 36)
        if candidate > upper:
            upper = candidate
    lower = Surd(0)
    for p, q in edges[:probes]:
        apex = _subdivide(p, q)[2]
        nearest = min(_surd_segment_distance_sq(apex, a, b) for a, b in edges)
        if nearest > lower:
            lower = nearest
    return KochStep(i, lower, upper)


def koch_level_for(n: int, side: Fraction = Fraction(1)) -> int:
    """Smallest level whose remaining tail (sqrt(3)/4) * side * 3^-i is below 2^-(n+2)."""
    i = 0
    while Fraction(7, 16) * side / 3**i > Fraction(1, 1 << (n + 2)):
        i += 1
    return i


def koch_distance(
    i_auto: bool = True,
    level: int | None = None,
    side: Fraction = Fraction(1),
    max_level: int = KOCH_MAX_LEVEL,
) -> DistOracle:
    """Distance oracle for the snowflake (``i_auto``) or for one fixed polygon K_level.

    Edges form a tree: the part of any K_i descending from an edge e lies in
    the disk on e as diameter, so branch and bound only expands edges whose
    disk can still hold the nearest point.
    """
    side = Fraction(side)
    if not i_auto and level is None:
        raise ValueError("a fixed Koch level is required when i_auto is off")
    roots = [(p, q) for p, q in KochApprox(0, koch_triangle(side), side).edges]
    reach = side * Fraction(37, 64)
    box = ComplexBox(
        DyInterval(_floor_at(-reach, 8), _ceil_at(reach, 8)),
        DyInterval(_floor_at(-reach, 8), _ceil_at(reach, 8)),
    )

    def evaluate(point: Point, n: int) -> Dyadic:
        target = koch_level_for(n, side) if i_auto else level
        if target > max_level:
            raise LevelCapExceeded(f"Koch level {target} exceeds cap {max_level} at precision {n}")
        p = n + 6
        slack = Fraction(1, 1 << (p - 2))
        step = Fraction(1, 1 << p)
        counter = itertools.count()
        heap: list[tuple[Fraction, int, int, SurdPoint, SurdPoint]] = []

        def push(depth: int, a: SurdPoint, b: SurdPoint) -> None:
            mid = _approx_point(((a[0] + b[0]) * HALF, (a[1] + b[1]) * HALF), p)
            to_mid = sqrt_floor(segment_distance_squared(point, mid, mid), p).to_fraction()
            bound = to_mid - side / 3**depth / 2 - slack
            heapq.heappush(heap, (bound, next(counter), depth, a, b))

        for a, b in roots:
            push(0, a, b)
        best: Fraction | None = None
        best_lo: Fraction | None = None
        while heap:
            bound, _, depth, a, b = heapq.heappop(heap)
            if best is not None and bound >= best:
                break
            if depth == target:
                ends = _approx_point(a, p), _approx_point(b, p)
                lo = sqrt_floor(segment_distance_squared(point, *ends), p).to_fraction()
                if best_lo is None or lo < best_lo:
                    best_lo, best = lo, lo + step
                continue
            for c, d in _children(a, b):
                push(depth + 1, c, d)
        return round_fraction(best_lo, n + 2)

    label = "koch" if i_auto else f"koch_{level}"
    return DistOracle(evaluate, box, description=label)


# -- escape-time sets ----------------------------------------------------------------


class Outcome(str, Enum):
    ESCAPED = "escaped"
    ATTRACTED = "attracted"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class OrbitResult:
    outcome: Outcome
    steps: int = 0
    cycle: int = 0

    def __str__(self) -> str:
        if self.outcome is Outcome.ESCAPED:
            return f"escaped({self.steps})"
        if self.outcome is Outcome.ATTRACTED:
            return f"attracted({self.cycle})"
        return "unknown"


UNKNOWN = OrbitResult(Outcome.UNKNOWN)
DEFAULT_BLOWUP = Dyadic(8)
# resolution used when an orbit is classified outside any pixel grid
CLASSIFY_RESOLUTION = 20
FACTOR_PRECISION = 24


@dataclass(frozen=True)
class EscapeParams:
    """Iteration budgets and precisions for escape-time certification.

    ``t_max`` caps Mandelbrot iteration (default ``t_per_n * n``); Julia
    pixels use ``a * n + b`` steps. ``precision`` defaults to
    ``n + precision_extra``.
    """

    t_max: int | None = None
    precision: int | None = None
    a: int = 8
    b: int = 32
    subdivision_budget: int = 64
    cycle_window: int = 32
    blowup: Dyadic = DEFAULT_BLOWUP
    t_per_n: int = 64
    precision_extra: int = 20

    def __post_init__(self) -> None:
        if self.t_max is not None and self.t_max < 1:
            raise ValueError("t_max must be at least 1")
        if self.a < 0 or self.b < 0:
            raise ValueError("escape budget coefficients must be non-negative")
        if self.subdivision_budget < 0:
            raise ValueError("subdivision budget must be non-negative")
        if self.cycle_window < 1:
            raise ValueError("cycle window must be at least 1")

    def mandel_cap(self, n: int) -> int:
        return self.t_max if self.t_max is not None else self.t_per_n * max(n, 1)

    def julia_cap(self, n: int) -> int:
        return max(1, self.a * n + self.b)

    def working_precision(self, n: int) -> int:
        return self.precision if self.precision is not None else n + self.precision_extra


def mandel_escape(c: ComplexBox, t_max: int, p: int, blowup: Dyadic = DEFAULT_BLOWUP) -> OrbitResult:
    """Iterate z -> z^2 + c from z = c over a whole box of parameters.

    ``escaped(t)`` certifies that every c in the box lies outside the
    Mandelbrot set.
    """
    if t_max < 1:
        raise ValueError("t_max must be at least 1")
    z = c
    for t in range(1, t_max + 1):
        z = box_step(z, c, p)
        lower_sq, _ = z.mag_squared_bounds()
        if lower_sq > FOUR:
            return OrbitResult(Outcome.ESCAPED, steps=t)
        if z.width() > blowup:
            return UNKNOWN
    return UNKNOWN


def _factor(z: ComplexBox) -> Dyadic:
    """Upper bound on |f'(w)|^2 = 4|w|^2 over the box."""
    _, upper_sq = z.mag_squared_bounds()
    return round_up(FOUR * upper_sq, FACTOR_PRECISION)


def _contracting_return(start: ComplexBox, c: ComplexBox, steps: int, p: int) -> bool:
    w, product = start, ONE
    for _ in range(steps):
        product = round_up(product * _factor(w), FACTOR_PRECISION)
        w = box_step(w, c, p)
    return product < ONE and w.issubset(start)


def classify_orbit(
    z: ComplexBox,
    c: ComplexBox,
    t_max: int,
    p: int,
    escape_sq: Dyadic,
    window: int = 32,
    blowup: Dyadic = DEFAULT_BLOWUP,
) -> OrbitResult:
    """Interval iteration of z -> z^2 + c with escape and attracting-cycle certificates.

    ``attracted(l)`` means some earlier orbit box B satisfies f^l(B) inside B
    with |(f^l)'| < 1 on B; f^l then contracts B into itself and every point
    of the starting box converges to an attracting cycle.
    """
    boxes: deque[ComplexBox] = deque([z], maxlen=window)
    factors: deque[Dyadic] = deque([_factor(z)], maxlen=window)
    for t in range(1, t_max + 1):
        z = box_step(boxes[-1], c, p)
        lower_sq, _ = z.mag_squared_bounds()
        if lower_sq > escape_sq:
            return OrbitResult(Outcome.ESCAPED, steps=t)
        if z.width() > blowup:
            return UNKNOWN
        product = ONE
        retry: tuple[int, ComplexBox] | None = None
        for ell in range(1, len(boxes) + 1):
            earlier = boxes[-ell]
            product = round_up(product * factors[-ell], FACTOR_PRECISION)
            if z.issubset(earlier):
                if product < ONE:
                    return OrbitResult(Outcome.ATTRACTED, steps=t, cycle=ell)
            elif retry is None:
                grown = earlier.inflate(max(earlier.width(), ulp(p - 4)))
                if z.issubset(grown):
                    retry = (ell, grown)
        if retry is not None and _contracting_return(retry[1], c, retry[0], p):
            return OrbitResult(Outcome.ATTRACTED, steps=t, cycle=retry[0])
        boxes.append(z)
        factors.append(_factor(z))
    return UNKNOWN


def in_main_cardioid(x: Dyadic, y: Dyadic) -> bool:
    shifted = x - Dyadic(1, -2)
    q = shifted * shifted + y * y
    return q * (q + shifted) <= (y * y).shift(-2)


def in_period2_disk(x: Dyadic, y: Dyadic) -> bool:
    return (x + ONE) * (x + ONE) + y * y <= Dyadic(1, -4)


def _certify_ball(
    d: Point,
    radius: Dyadic,
    certify: Callable[[ComplexBox], bool],
    budget: int,
) -> tuple[bool, int]:
    """Certify every point of the closed ball B(d, radius) by depth-first box splitting.

    Sub-boxes missing the ball are dropped; the exploration order is fixed,
    so a larger budget only extends the same search.
    """
    x, y = d
    radius_sq = radius * radius
    stack = [ComplexBox.around(x, y, radius)]
    splits = 0
    while stack:
        box = stack.pop()
        if box.distance_squared_to(x, y) > radius_sq:
            continue
        if certify(box):
            continue
        if splits >= budget:
            return False, splits
        splits += 1
        stack.extend(reversed(box.split()))
    return True, splits


def mandel_pixel(params: EscapeParams = EscapeParams()) -> PixelDecision:
    """Pixel decisions for the Mandelbrot set.

    0 is answered only when every point within 2 * 2^-n of d is certified to
    escape. Centers in the main cardioid, the period-2 disk, or with a
    certified attracting cycle are certified_in; other 1 answers are
    heuristic, bounded by the iteration cap.
    """

    def judge(d: Point, n: int) -> Verdict:
        t_max, p = params.mandel_cap(n), params.working_precision(n)
        cx, cy = d
        if in_main_cardioid(cx, cy) or in_period2_disk(cx, cy):
            return Verdict(1, Diagnosis.CERTIFIED_IN)
        center = ComplexBox.point(cx, cy)
        # a box certifies only if the point inside it does
        if mandel_escape(center, t_max, p, params.blowup).outcome is not Outcome.ESCAPED:
            orbit = classify_orbit(
                ComplexBox.point(ZERO, ZERO), center, t_max, p, FOUR, params.cycle_window, params.blowup
            )
            attracted = orbit.outcome is Outcome.ATTRACTED
            return Verdict(1, Diagnosis.CERTIFIED_IN if attracted else Diagnosis.UNDETERMINED)
        escaped, splits = _certify_ball(
            d,
            ulp(n - 1),
            lambda box: mandel_escape(box, t_max, p, params.blowup).outcome is Outcome.ESCAPED,
            params.subdivision_budget,
        )
        if escaped:
            return Verdict(0, Diagnosis.CERTIFIED_OUT, splits)
        return Verdict(1, Diagnosis.UNDETERMINED, splits)

    bound = ComplexBox(DyInterval(Dyadic(-2), Dyadic(1, -1)), DyInterval(Dyadic(-5, -2), Dyadic(5, -2)))
    return PixelDecision(judge, bound, description="mandelbrot")


def naive_mandel_pixel(params: EscapeParams = EscapeParams()) -> PixelDecision:
    """The grid-point algorithm: iterate only the pixel center; nothing is certified."""

    def judge(d: Point, n: int) -> Verdict:
        orbit = mandel_escape(ComplexBox.point(*d), params.mandel_cap(n), params.working_precision(n), params.blowup)
        return Verdict(0 if orbit.outcome is Outcome.ESCAPED else 1, Diagnosis.UNDETERMINED)

    return PixelDecision(judge, mandel_pixel(params).bound_box, description="mandelbrot_naive")


CParam = tuple[RealOracle, RealOracle]


def _parameter_box(c: CParam, p: int) -> ComplexBox:
    return ComplexBox(
        DyInterval.around(c[0].query(p), ulp(p)),
        DyInterval.around(c[1].query(p), ulp(p)),
    )


def escape_radius_sq(c_box: ComplexBox) -> Dyadic:
    """R^2 for R = max(2, |c| + 1), using an upper bound on |c|."""
    _, upper_sq = c_box.mag_squared_bounds()
    radius = max(Dyadic(2), sqrt_ceil(upper_sq, 8) + ONE)
    return radius * radius


def julia_classify(
    c: CParam,
    x: ComplexBox,
    params: EscapeParams = EscapeParams(),
    n: int = CLASSIFY_RESOLUTION,
) -> OrbitResult:
    """Classify the orbit of a box under z -> z^2 + c with the budgets of resolution n."""
    p = params.working_precision(n)
    c_box = _parameter_box(c, p)
    return classify_orbit(
        x, c_box, params.julia_cap(n), p, escape_radius_sq(c_box), params.cycle_window, params.blowup
    )


def julia_pixel(c: CParam, filled: bool, params: EscapeParams = EscapeParams()) -> PixelDecision:
    """Pixel decisions for the filled Julia set K_c or the Julia set J_c.

    The parameter is read at the working precision of each resolution. For
    J_c, a box that is certified attracted lies in the interior of K_c and
    so away from J_c.
    """

    def classify(box: ComplexBox, n: int) -> OrbitResult:
        return julia_classify(c, box, params, n)

    def judge(d: Point, n: int) -> Verdict:
        cx, cy = d
        if filled:
            center = classify(ComplexBox.point(cx, cy), n)
            if center.outcome is not Outcome.ESCAPED:
                attracted = center.outcome is Outcome.ATTRACTED
                return Verdict(1, Diagnosis.CERTIFIED_IN if attracted else Diagnosis.UNDETERMINED)
            wanted: tuple[Outcome, ...] = (Outcome.ESCAPED,)
        else:
            wanted = (Outcome.ESCAPED, Outcome.ATTRACTED)
        certified, splits = _certify_ball(
            d,
            ulp(n - 1),
            lambda box: classify(box, n).outcome in wanted,
            params.subdivision_budget,
        )
        if certified:
            return Verdict(0, Diagnosis.CERTIFIED_OUT, splits)
        if not filled:
            offset = ulp(n + 1)
            probes = [(cx, cy), (cx + offset, cy), (cx - offset, cy), (cx, cy + offset), (cx, cy - offset)]
            seen = {classify(ComplexBox.point(*probe), n).outcome for probe in probes}
            if Outcome.ESCAPED in seen and Outcome.ATTRACTED in seen:
                return Verdict(1, Diagnosis.CERTIFIED_IN, splits)
        return Verdict(1, Diagnosis.UNDETERMINED, splits)

    label = "julia_filled" if filled else "julia"
    reach = escape_radius_sq(_parameter_box(c, 8))
    half = sqrt_ceil(reach, 4)
    bound = ComplexBox(DyInterval(-half, half), DyInterval(-half, half))
    return PixelDecision(judge, bound, description=label)


# -- sampling audit ------------------------------------------------------------------


@dataclass
class AuditReport:
    pixels: int = 0
    samples: int = 0
    failures: list[tuple[int, int]] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures


SAMPLE_BITS = 16


def _ball_samples(d: Point, n: int, count: int, rng: random.Random) -> list[Point]:
    """Points of B(d, 2 * 2^-n) on a 2^-(n+15) lattice."""
    limit = 1 << SAMPLE_BITS
    points = []
    while len(points) < count:
        ux, uy = rng.randint(-limit, limit), rng.randint(-limit, limit)
        if ux * ux + uy * uy > limit * limit:
            continue
        points.append((d[0] + Dyadic(ux, -(n + 15)), d[1] + Dyadic(uy, -(n + 15))))
    return points


def _point_escapes(z: Point, c: Point, steps: int, p: int, escape_sq: Dyadic) -> bool:
    x, y = z
    for _ in range(steps):
        x, y = round_to(x * x - y * y + c[0], p), round_to((x * y).shift(1) + c[1], p)
        if x * x + y * y > escape_sq:
            return True
    return False


def _sample_checker(
    kind: str,
    params: EscapeParams,
    n: int,
    p: int,
    c: CParam | None,
) -> Callable[[Point], bool]:
    if kind == "mandelbrot":
        steps = 10 * params.mandel_cap(n)
        return lambda point: _point_escapes(point, point, steps, p, FOUR)
    if kind not in ("julia", "julia_filled"):
        raise ValueError(f"no sampling audit for {kind!r}")
    if c is None:
        raise ValueError("a Julia audit needs the parameter c")
    steps = 10 * params.julia_cap(n)
    c_box = _parameter_box(c, p)
    escape_sq = escape_radius_sq(c_box)
    if kind == "julia_filled":
        c_point = (c[0].query(p), c[1].query(p))
        return lambda point: _point_escapes(point, c_point, steps, p, escape_sq)

    def settles(point: Point) -> bool:
        orbit = classify_orbit(
            ComplexBox.point(*point), c_box, steps, p, escape_sq, params.cycle_window, params.blowup
        )
        return orbit.outcome is not Outcome.UNKNOWN

    return settles


def audit_pixels(
    pixels: PixelSet,
    kind: str,
    params: EscapeParams = EscapeParams(),
    c: CParam | None = None,
    samples: int = 100,
    seed: int = 0,
) -> AuditReport:
    """Check certified_out pixels of an escape-time render by random sampling.

    ``kind`` is ``mandelbrot`` (every sample escapes as a parameter),
    ``julia_filled`` (every sample escapes) or ``julia`` (every sample is
    certified escaped or attracted). Samples iterate for ten times the
    pixel's own budget.
    """
    n = pixels.n
    p = params.working_precision(n) + 32
    check = _sample_checker(kind, params, n, p, c)
    report = AuditReport()
    for record in pixels.records:
        if record.verdict.diagnosis is not Diagnosis.CERTIFIED_OUT:
            continue
        report.pixels += 1
        rng = random.Random(f"{seed}:{record.ix}:{record.iy}")
        d = pixels.point(record.ix, record.iy)
        for point in _ball_samples(d, n, samples, rng):
            report.samples += 1
            if not check(point):
                report.failures.append((record.ix, record.iy))
                break
    if report.failures:
        logger.warning("%s audit: %d certified pixels failed sampling", kind, len(report.failures))
    return report

