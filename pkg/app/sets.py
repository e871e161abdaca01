"""Pixel-computable sets: distance oracles, pixel decisions and their conversions.

A pixel at grid point d and resolution n is the closed ball B(d, 2^-n). A
decision procedure must answer 1 when the ball meets the set, 0 when the
doubled ball B(d, 2 * 2^-n) misses it, and may answer either way in between.
"""
from __future__ import annotations

import logging
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Callable, Iterable, Sequence

import numpy as np

from .dyadic import ZERO, Dyadic, round_to, sqrt_ceil, sqrt_floor, ulp
from .exceptions import EmptySetError, PrecisionBudgetExceeded
from .interval import ComplexBox, DyInterval
from .oracles import RealOracle
from .utils.costs import metered

logger = logging.getLogger(__name__)

Point = tuple[Dyadic, Dyadic]

DEFAULT_THRESHOLD = Dyadic(3, -1)
HAUSDORFF_PRECISION = 32
_INT64_SAFE = 1 << 30


class Diagnosis(str, Enum):
    CERTIFIED_OUT = "certified_out"
    CERTIFIED_IN = "certified_in"
    UNDETERMINED = "undetermined"


@dataclass(frozen=True)
class Verdict:
    decision: int
    diagnosis: Diagnosis
    subdivisions: int = 0

    def __post_init__(self) -> None:
        if self.diagnosis is Diagnosis.CERTIFIED_OUT and self.decision != 0:
            raise ValueError("certified_out verdict must decide 0")
        if self.diagnosis is Diagnosis.CERTIFIED_IN and self.decision != 1:
            raise ValueError("certified_in verdict must decide 1")


@dataclass(frozen=True)
class DistOracle:
    evaluate: Callable[[Point, int], Dyadic]
    bound_box: ComplexBox | None = None
    description: str = "set"

    def eval(self, point: Point, n: int) -> Dyadic:
        """A dyadic within 2^-n of the distance from point to the set."""
        return self.evaluate(point, n)


@dataclass(frozen=True)
class PixelDecision:
    judge: Callable[[Point, int], Verdict]
    bound_box: ComplexBox | None = None
    description: str = "set"

    def verdict(self, d: Point, n: int) -> Verdict:
        return self.judge(d, n)

    def decide(self, d: Point, n: int) -> int:
        return self.judge(d, n).decision

    def diagnose(self, d: Point, n: int) -> Diagnosis:
        return self.judge(d, n).diagnosis


@dataclass(frozen=True)
class PixelRecord:
    ix: int
    iy: int
    verdict: Verdict
    bit_ops: int = 0

    @property
    def decision(self) -> int:
        return self.verdict.decision


@dataclass(frozen=True)
class PixelSet:
    """Pixels examined at resolution n on the grid of spacing 2^-(n+k).

    ``records`` holds every examined grid point, top row first and left to
    right within a row; the set itself is the decide=1 subset.
    """

    n: int
    k: int
    window: ComplexBox
    records: tuple[PixelRecord, ...]
    touches_boundary: bool = False
    columns: int = 0
    rows: int = 0

    @property
    def spacing_exponent(self) -> int:
        return self.n + self.k

    def point(self, ix: int, iy: int) -> Point:
        e = self.spacing_exponent
        return Dyadic(ix, -e), Dyadic(iy, -e)

    @property
    def kept(self) -> list[PixelRecord]:
        return [r for r in self.records if r.decision == 1]

    @property
    def indices(self) -> list[tuple[int, int]]:
        return [(r.ix, r.iy) for r in self.kept]

    @property
    def centers(self) -> list[Point]:
        return [self.point(ix, iy) for ix, iy in self.indices]

    def counts(self) -> dict[str, int]:
        tally = {d.value: 0 for d in Diagnosis}
        for record in self.records:
            tally[record.verdict.diagnosis.value] += 1
        return tally


def grid_indices(lo: Dyadic, hi: Dyadic, e: int) -> range:
    return range(lo.shift(e).ceil(), hi.shift(e).floor() + 1)


def pixel_from_distance(dist: DistOracle, threshold: Dyadic = DEFAULT_THRESHOLD) -> PixelDecision:
    """Decide a pixel from one distance query at precision n + 2.

    With the default threshold 3/2 the pixel is kept iff the approximate
    distance a satisfies a < 3 * 2^-(n+1).
    """

    def judge(d: Point, n: int) -> Verdict:
        a = dist.eval(d, n + 2)
        cutoff = threshold.shift(-n)
        if a < cutoff:
            # d_S <= a + 2^-(n+2) <= 2^-n
            certain = a <= Dyadic(3, -(n + 2))
            return Verdict(1, Diagnosis.CERTIFIED_IN if certain else Diagnosis.UNDETERMINED)
        # d_S >= a - 2^-(n+2) > 2^-n
        certain = a >= Dyadic(5, -(n + 2))
        return Verdict(0, Diagnosis.CERTIFIED_OUT if certain else Diagnosis.UNDETERMINED)

    return PixelDecision(judge, dist.bound_box, description=dist.description)


def _scan_row(decision: PixelDecision, n: int, e: int, iy: int, columns: Sequence[int]) -> list[PixelRecord]:
    row = []
    y = Dyadic(iy, -e)
    for ix in columns:
        with metered() as meter:
            verdict = decision.verdict((Dyadic(ix, -e), y), n)
        row.append(PixelRecord(ix, iy, verdict, meter.bit_ops))
    return row


def _touches(window: ComplexBox, records: Iterable[PixelRecord], n: int, e: int) -> bool:
    ring = ulp(n - 1)
    for record in records:
        if record.decision != 1:
            continue
        x, y = Dyadic(record.ix, -e), Dyadic(record.iy, -e)
        if (
            x - window.re.lo < ring
            or window.re.hi - x < ring
            or y - window.im.lo < ring
            or window.im.hi - y < ring
        ):
            return True
    return False


def approximate_set(
    decision: PixelDecision,
    n: int,
    window: ComplexBox,
    k: int = 0,
    workers: int = 1,
) -> PixelSet:
    """Evaluate every grid point of the window; rows run in parallel when workers > 1."""
    e = n + k
    columns = list(grid_indices(window.re.lo, window.re.hi, e))
    rows = list(reversed(grid_indices(window.im.lo, window.im.hi, e)))

    def scan(iy: int) -> list[PixelRecord]:
        return _scan_row(decision, n, e, iy, columns)

    if workers > 1 and len(rows) > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            scanned = list(executor.map(scan, rows))
    else:
        scanned = [scan(iy) for iy in rows]
    records = tuple(record for row in scanned for record in row)

    touches = _touches(window, records, n, e)
    if touches:
        logger.warning(
            "%s: kept pixels within 2*2^-%d of the window edge; window may be too small",
            decision.description,
            n,
        )
    return PixelSet(n, k, window, records, touches, len(columns), len(rows))


def refine_set(
    decision: PixelDecision,
    n: int,
    window: ComplexBox,
    k: int = 0,
    base: int = 0,
) -> PixelSet:
    """Same guarantee as :func:`approximate_set`, examining only children of kept pixels.

    Level ``base`` is enumerated in full over the window grown by one grid
    step. A point that must be kept at level L+1 lies within 2^-L of a point
    that must be kept at level L, so each level examines only the grid points
    within Chebyshev distance 2^-L of the previous level's kept points.
    """
    base = min(base, n)
    e = base + k
    grown = window.inflate(ulp(e))
    frontier = {
        (ix, iy)
        for iy in grid_indices(grown.im.lo, grown.im.hi, e)
        for ix in grid_indices(grown.re.lo, grown.re.hi, e)
    }
    level = base
    while True:
        e = level + k
        kept = set()
        records = []
        for ix, iy in sorted(frontier, key=lambda t: (-t[1], t[0])):
            verdict = decision.verdict((Dyadic(ix, -e), Dyadic(iy, -e)), level)
            records.append(PixelRecord(ix, iy, verdict))
            if verdict.decision == 1:
                kept.add((ix, iy))
        if level == n:
            break
        reach = 1 << (k + 1)
        frontier = {
            (2 * ix + dx, 2 * iy + dy)
            for ix, iy in kept
            for dx in range(-reach, reach + 1)
            for dy in range(-reach, reach + 1)
        }
        level += 1
    return PixelSet(n, k, window, tuple(records), _touches(window, records, n, n + k))


def _as_array(points: Sequence[tuple[int, int]]) -> np.ndarray:
    biggest = max(max(abs(x), abs(y)) for x, y in points)
    dtype = np.int64 if biggest < _INT64_SAFE else object
    return np.array(points, dtype=dtype).reshape(-1, 2)


def _directed_sq(a: np.ndarray, b: np.ndarray) -> int:
    """max over a of min over b of the squared distance, exactly."""
    chunk = max(1, 2_000_000 // max(1, len(b)))
    best = 0
    for start in range(0, len(a), chunk):
        part = a[start:start + chunk]
        diff = part[:, None, :] - b[None, :, :]
        sq = (diff * diff).sum(axis=2)
        best = max(best, int(sq.min(axis=1).max()))
    return best


def hausdorff_pixels(p_set: PixelSet, q_set: PixelSet, p: int = HAUSDORFF_PRECISION) -> DyInterval:
    """Hausdorff distance between the kept centers of two pixel sets.

    Squared distances are compared exactly on a common grid; only the final
    maximum is rooted, giving an enclosing interval of width at most 2^-p.
    """
    if not p_set.indices or not q_set.indices:
        raise EmptySetError("Hausdorff distance needs two nonempty pixel sets")
    e = max(p_set.spacing_exponent, q_set.spacing_exponent)

    def common(pixels: PixelSet) -> list[tuple[int, int]]:
        s = e - pixels.spacing_exponent
        return [(ix << s, iy << s) for ix, iy in pixels.indices]

    a, b = _as_array(common(p_set)), _as_array(common(q_set))
    if a.dtype != b.dtype:
        a, b = a.astype(object), b.astype(object)
    squared = Dyadic(max(_directed_sq(a, b), _directed_sq(b, a)), -2 * e)
    return DyInterval(sqrt_floor(squared, p), sqrt_ceil(squared, p))


def distance_from_pixels(
    decision: PixelDecision,
    n_hi: int,
    window: ComplexBox | None = None,
    k: int = 0,
) -> DistOracle:
    """Distance oracle from a pixel decision, valid for precisions n <= n_hi - 3.

    The pixel set at resolution n_hi is built once, on first use; the answer
    is the distance to its nearest kept center, which is within 2 * 2^-n_hi
    of the true distance.
    """
    window = window or decision.bound_box
    if window is None:
        raise ValueError("distance_from_pixels needs a window or a bounded decision")
    lock = threading.Lock()
    cache: dict[str, np.ndarray] = {}
    e = n_hi + k
    extra = 4

    def centers() -> np.ndarray:
        with lock:
            if "centers" not in cache:
                pixels = refine_set(decision, n_hi, window, k)
                if not pixels.indices:
                    raise EmptySetError(f"{decision.description}: no pixels kept at n={n_hi}")
                scaled = [(ix << extra, iy << extra) for ix, iy in pixels.indices]
                cache["centers"] = _as_array(scaled)
            return cache["centers"]

    def evaluate(point: Point, n: int) -> Dyadic:
        if n + 3 > n_hi:
            raise PrecisionBudgetExceeded(
                f"precision {n} needs n_hi >= {n + 3}, converter was built for {n_hi}"
            )
        grid = centers()
        x = round_to(point[0], e + extra).shift(e + extra).floor()
        y = round_to(point[1], e + extra).shift(e + extra).floor()
        if grid.dtype != object and max(abs(x), abs(y)) >= _INT64_SAFE:
            grid = grid.astype(object)
        target = np.array([[x, y]], dtype=grid.dtype)
        sq = int(_directed_sq(target, grid))
        return sqrt_floor(Dyadic(sq, -2 * (e + extra)), n + 2)

    return DistOracle(evaluate, window, description=f"pixels({decision.description}, n={n_hi})")


# -- primitive shapes ------------------------------------------------------


def _frac(x: Dyadic | Fraction | int) -> Fraction:
    return x.to_fraction() if isinstance(x, Dyadic) else Fraction(x)


def segment_distance_squared(point: Point, a: Point, b: Point) -> Fraction:
    """Exact squared distance from a point to the closed segment [a, b]."""
    px, py = _frac(point[0]), _frac(point[1])
    ax, ay = _frac(a[0]), _frac(a[1])
    bx, by = _frac(b[0]), _frac(b[1])
    dx, dy = bx - ax, by - ay
    length_sq = dx * dx + dy * dy
    if length_sq == 0:
        return (px - ax) ** 2 + (py - ay) ** 2
    t = ((px - ax) * dx + (py - ay) * dy) / length_sq
    t = min(Fraction(1), max(Fraction(0), t))
    cx, cy = ax + t * dx, ay + t * dy
    return (px - cx) ** 2 + (py - cy) ** 2


def point_distance(center: Point) -> DistOracle:
    def evaluate(point: Point, n: int) -> Dyadic:
        return sqrt_floor(segment_distance_squared(point, center, center), n + 1)

    return DistOracle(evaluate, ComplexBox.point(*center), description="point")


def segment_distance(a: Point, b: Point) -> DistOracle:
    """Distance to a closed segment; a zero-length segment is the point a."""

    def evaluate(point: Point, n: int) -> Dyadic:
        return sqrt_floor(segment_distance_squared(point, a, b), n + 1)

    box = ComplexBox(
        DyInterval(min(a[0], b[0]), max(a[0], b[0])),
        DyInterval(min(a[1], b[1]), max(a[1], b[1])),
    )
    return DistOracle(evaluate, box, description="segment")


Param = Dyadic | RealOracle


def _param(value: Param, n: int) -> Dyadic:
    return value.query(n) if isinstance(value, RealOracle) else Dyadic.of(value)


def _round_body(center: tuple[Param, Param], radius: Param, filled: bool) -> DistOracle:
    label = "disk" if filled else "circle"
    exact = not any(isinstance(v, RealOracle) for v in (*center, radius))

    def evaluate(point: Point, n: int) -> Dyadic:
        p = n + 3
        cx, cy, r = _param(center[0], p), _param(center[1], p), _param(radius, p)
        to_center = sqrt_floor(segment_distance_squared(point, (cx, cy), (cx, cy)), p)
        gap = to_center - r
        if filled:
            return max(ZERO, gap)
        return abs(gap)

    probe = 4
    cx, cy, r = _param(center[0], probe), _param(center[1], probe), _param(radius, probe)
    reach = abs(r) + (ZERO if exact else ulp(probe - 2))
    box = ComplexBox(DyInterval.around(cx, reach), DyInterval.around(cy, reach))
    return DistOracle(evaluate, box, description=label)


def circle_distance(center: tuple[Param, Param], radius: Param) -> DistOracle:
    return _round_body(center, radius, filled=False)


def disk_distance(center: tuple[Param, Param], radius: Param) -> DistOracle:
    return _round_body(center, radius, filled=True)


def _inside_polygon(point: Point, vertices: Sequence[Point]) -> bool:
    """Even-odd crossing test in exact arithmetic."""
    px, py = _frac(point[0]), _frac(point[1])
    inside = False
    count = len(vertices)
    for i in range(count):
        ax, ay = _frac(vertices[i][0]), _frac(vertices[i][1])
        bx, by = _frac(vertices[(i + 1) % count][0]), _frac(vertices[(i + 1) % count][1])
        if (ay > py) != (by > py):
            cross = ax + (py - ay) * (bx - ax) / (by - ay)
            if px < cross:
                inside = not inside
    return inside


def polygon_distance(vertices: Sequence[Point], filled: bool = False) -> DistOracle:
    """Distance to a closed polygon's boundary, or to the region it bounds when filled."""
    if len(vertices) < 2:
        raise ValueError("a polygon needs at least two vertices")
    edges = [(vertices[i], vertices[(i + 1) % len(vertices)]) for i in range(len(vertices))]

    def evaluate(point: Point, n: int) -> Dyadic:
        if filled and _inside_polygon(point, vertices):
            return ZERO
        best = min(segment_distance_squared(point, a, b) for a, b in edges)
        return sqrt_floor(best, n + 1)

    xs = [v[0] for v in vertices]
    ys = [v[1] for v in vertices]
    box = ComplexBox(DyInterval(min(xs), max(xs)), DyInterval(min(ys), max(ys)))
    return DistOracle(evaluate, box, description="polygon")


def empty_distance(far: Dyadic = Dyadic(1, 20)) -> DistOracle:
    """A set that is nowhere near any window: every distance reads as ``far``."""
    return DistOracle(lambda point, n: far, None, description="empty")


SHAPES = ("point", "segment", "circle", "disk", "polygon")


def primitive_distance(shape: str, **params) -> DistOracle:
    if shape == "point":
        return point_distance(params["center"])
    if shape == "segment":
        return segment_distance(params["start"], params["end"])
    if shape == "circle":
        return circle_distance(params["center"], params["radius"])
    if shape == "disk":
        return disk_distance(params["center"], params["radius"])
    if shape == "polygon":
        return polygon_distance(params["vertices"], filled=params.get("filled", False))
    raise ValueError(f"unknown shape {shape!r}; expected one of {', '.join(SHAPES)}")
