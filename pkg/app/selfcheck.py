"""Cross-module equivalence suites run by ``bitcanvas selfcheck``.

Every suite compares library output with an independent exact reference
(rational Taylor sums, rational bisection, squared-distance geometry) and
raises :class:`InvariantViolation` naming the broken property.
"""
from __future__ import annotations

import logging
import random
import tempfile
import time
from dataclasses import dataclass, field, replace
from fractions import Fraction
from pathlib import Path
from typing import Callable

import numpy as np

from .dyadic import ONE, ZERO, Dyadic, sqrt_ceil, sqrt_floor
from .exceptions import BitCanvasError, InvariantViolation
from .fractals import EscapeParams, julia_pixel, koch_distance, koch_level_for, koch_step_hausdorff, mandel_pixel
from .interval import ComplexBox
from .machines import cbrt_g_machine, exp_expm1_machine, exp_machine, step_graph
from .oracles import RealOracle, oracle_from_dyadic
from .renderer import RenderJob, RenderSettings, ShapeParams, fit_cost, measure_cost, run_render, write_render
from .sets import (
    Diagnosis,
    PixelDecision,
    PixelSet,
    approximate_set,
    circle_distance,
    disk_distance,
    distance_from_pixels,
    pixel_from_distance,
    segment_distance,
)

logger = logging.getLogger(__name__)

REFERENCE_BITS = 30


@dataclass(frozen=True)
class CheckPlan:
    exp_points: int
    exp_precisions: tuple[int, ...]
    compose_points: int
    compose_precisions: tuple[int, ...]
    cube_root_points: int
    cube_root_precisions: tuple[int, ...]
    soundness_levels: tuple[int, ...]
    round_trip_points: int
    hausdorff_levels: tuple[int, ...]
    koch_steps: int
    koch_render_n: int
    mandel_n: int
    audit_samples: int
    julia_levels: tuple[int, ...]
    cost_precisions: tuple[int, ...] = ()


QUICK = CheckPlan(
    exp_points=40,
    exp_precisions=(8, 16, 32),
    compose_points=20,
    compose_precisions=(8, 16),
    cube_root_points=20,
    cube_root_precisions=(10, 20),
    soundness_levels=(3, 4),
    round_trip_points=10,
    hausdorff_levels=(3, 4),
    koch_steps=4,
    koch_render_n=4,
    mandel_n=3,
    audit_samples=10,
    julia_levels=(3,),
)

FULL = CheckPlan(
    exp_points=1000,
    exp_precisions=(8, 16, 32, 64),
    compose_points=200,
    compose_precisions=(8, 16, 32),
    cube_root_points=200,
    cube_root_precisions=(10, 20, 30, 40),
    soundness_levels=(3, 4, 5, 6, 7, 8),
    round_trip_points=50,
    hausdorff_levels=(4, 5, 6),
    koch_steps=6,
    koch_render_n=8,
    mandel_n=7,
    audit_samples=100,
    julia_levels=(5, 6, 7),
    cost_precisions=(4, 6, 8, 10),
)

PLANS = {"quick": QUICK, "full": FULL}


@dataclass
class CheckContext:
    plan: CheckPlan
    settings: RenderSettings = field(default_factory=RenderSettings)
    escape: EscapeParams = field(default_factory=EscapeParams)
    seed: int = 0

    def rng(self, name: str) -> random.Random:
        return random.Random(f"{self.seed}:{name}")


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str
    elapsed: float = 0.0


# -- exact references ------------------------------------------------------------


def jittered_oracle(x: Dyadic, seed: object) -> RealOracle:
    """An honest but unhelpful oracle: each answer is off by up to 15/16 of the allowed error."""
    rng = random.Random(str(seed))

    def approximate(n: int) -> Dyadic:
        return x + Dyadic(rng.randint(-15, 15), -(n + 4))

    return RealOracle(approximate, description=f"jitter({x})")


def exp_reference(x: Fraction, bits: int) -> Fraction:
    """e^x for |x| <= 1 within 2^-bits; the tail is at most twice the first omitted term."""
    total, term, j = Fraction(0), Fraction(1), 0
    limit = Fraction(1, 1 << bits)
    while 2 * abs(term) >= limit:
        total += term
        j += 1
        term = term * x / j
    return total


def cube_root_bracket(value: Fraction, bits: int) -> tuple[Fraction, Fraction]:
    lo, hi = Fraction(0), Fraction(1)
    width = Fraction(1, 1 << bits)
    while hi - lo > width:
        mid = (lo + hi) / 2
        if mid**3 <= value:
            lo = mid
        else:
            hi = mid
    return lo, hi


def _fraction_point(point: tuple[Dyadic, Dyadic]) -> tuple[Fraction, Fraction]:
    return point[0].to_fraction(), point[1].to_fraction()


def _segment_sq(p: tuple[Fraction, Fraction], a: tuple[Fraction, Fraction], b: tuple[Fraction, Fraction]) -> Fraction:
    dx, dy = b[0] - a[0], b[1] - a[1]
    length_sq = dx * dx + dy * dy
    t = Fraction(0) if length_sq == 0 else ((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / length_sq
    t = min(Fraction(1), max(Fraction(0), t))
    ex, ey = p[0] - a[0] - t * dx, p[1] - a[1] - t * dy
    return ex * ex + ey * ey


@dataclass(frozen=True)
class RoundShape:
    """A disk (filled) or circle of the given radius centred at the origin."""

    radius: Fraction
    filled: bool

    def within(self, p: tuple[Fraction, Fraction], t: Fraction) -> bool:
        s = p[0] * p[0] + p[1] * p[1]
        inner = max(Fraction(0), self.radius - t)
        if s > (self.radius + t) ** 2:
            return False
        return self.filled or s >= inner * inner

    def beyond(self, p: tuple[Fraction, Fraction], t: Fraction) -> bool:
        s = p[0] * p[0] + p[1] * p[1]
        if s >= (self.radius + t) ** 2:
            return True
        return not self.filled and self.radius > t and s <= (self.radius - t) ** 2

    def bounds(self, p: tuple[Fraction, Fraction]) -> tuple[Fraction, Fraction]:
        s = p[0] * p[0] + p[1] * p[1]
        lo = sqrt_floor(s, 60).to_fraction() - self.radius
        hi = sqrt_ceil(s, 60).to_fraction() - self.radius
        if self.filled:
            return max(Fraction(0), lo), max(Fraction(0), hi)
        if lo >= 0:
            return lo, hi
        if hi <= 0:
            return -hi, -lo
        return Fraction(0), max(-lo, hi)


@dataclass(frozen=True)
class SegmentShape:
    segments: tuple[tuple[tuple[Fraction, Fraction], tuple[Fraction, Fraction]], ...]

    def squared(self, p: tuple[Fraction, Fraction]) -> Fraction:
        return min(_segment_sq(p, a, b) for a, b in self.segments)

    def within(self, p: tuple[Fraction, Fraction], t: Fraction) -> bool:
        return self.squared(p) <= t * t

    def beyond(self, p: tuple[Fraction, Fraction], t: Fraction) -> bool:
        return self.squared(p) >= t * t

    def bounds(self, p: tuple[Fraction, Fraction]) -> tuple[Fraction, Fraction]:
        s = self.squared(p)
        return sqrt_floor(s, 60).to_fraction(), sqrt_ceil(s, 60).to_fraction()


UNIT_WINDOW = ComplexBox.around(ZERO, ZERO, Dyadic(3, -1))
STEP_WINDOW = ComplexBox.around(ZERO, Dyadic(1, -1), Dyadic(3, -1))
_F = Fraction


def primitive_cases(threshold: Dyadic) -> list[tuple[str, PixelDecision, RoundShape | SegmentShape, ComplexBox]]:
    origin = (ZERO, ZERO)
    return [
        ("disk", pixel_from_distance(disk_distance(origin, ONE), threshold), RoundShape(_F(1), True), UNIT_WINDOW),
        ("circle", pixel_from_distance(circle_distance(origin, ONE), threshold), RoundShape(_F(1), False), UNIT_WINDOW),
        (
            "segment",
            pixel_from_distance(segment_distance((Dyadic(-1), ZERO), (ONE, ZERO)), threshold),
            SegmentShape((((_F(-1), _F(0)), (_F(1), _F(0))),)),
            UNIT_WINDOW,
        ),
        (
            "step",
            pixel_from_distance(step_graph(STEP_WINDOW), threshold),
            SegmentShape(
                (
                    ((_F(-3, 2), _F(0)), (_F(0), _F(0))),
                    ((_F(0), _F(1)), (_F(3, 2), _F(1))),
                )
            ),
            STEP_WINDOW,
        ),
    ]


def audit_decisions(name: str, pixels: PixelSet, shape: RoundShape | SegmentShape) -> int:
    """Check the pixel-decision contract against exact geometry; returns the number of pixels checked."""
    t = Fraction(1, 1 << pixels.n)
    for record in pixels.records:
        p = _fraction_point(pixels.point(record.ix, record.iy))
        if shape.within(p, t) and record.decision != 1:
            raise InvariantViolation(
                f"{name} n={pixels.n}: decide=1 whenever d_S <= 2^-n fails at {p[0]},{p[1]}"
            )
        if shape.beyond(p, 2 * t) and record.decision == 1:
            raise InvariantViolation(
                f"{name} n={pixels.n}: decide=1 never when d_S >= 2*2^-n fails at {p[0]},{p[1]}"
            )
    return len(pixels.records)


# -- suites ------------------------------------------------------------------------


def check_exp_budget(ctx: CheckContext) -> str:
    machine = exp_machine()
    for n in range(0, 129):
        if machine.precision_map(n) != n + 4:
            raise InvariantViolation(f"exp precision map gives {machine.precision_map(n)} at n={n}, expected n+4")
    rng = ctx.rng("exp")
    runs = 0
    for i in range(ctx.plan.exp_points):
        x = Dyadic(rng.randint(-(1 << 40), 1 << 40), -40)
        for n in ctx.plan.exp_precisions:
            out = machine.apply(jittered_oracle(x, f"exp:{i}:{n}"), n).to_fraction()
            reference = exp_reference(x.to_fraction(), n + REFERENCE_BITS)
            if abs(out - reference) + Fraction(1, 1 << (n + REFERENCE_BITS)) >= Fraction(1, 1 << n):
                raise InvariantViolation(f"|exp output - e^x| >= 2^-{n} at x={x}")
            runs += 1
    return f"{runs} evaluations within 2^-n; precision map n+4"


def check_composition_budget(ctx: CheckContext) -> str:
    machine = exp_expm1_machine()
    for n in range(0, 129):
        if machine.precision_map(n) != n + 8:
            raise InvariantViolation(f"exp(expm1) precision map gives {machine.precision_map(n)} at n={n}")
    rng = ctx.rng("compose")
    runs = 0
    for i in range(ctx.plan.compose_points):
        # domain of expm1 is [-1, 1/2]
        x = Dyadic(rng.randint(-(1 << 40), 1 << 39), -40)
        for n in ctx.plan.compose_precisions:
            bits = n + REFERENCE_BITS
            inner = exp_reference(x.to_fraction(), bits + 2) - 1
            # rounding the inner value moves e^y by less than twice the rounding error
            rounded = Fraction(round(inner * (1 << (bits + 2))), 1 << (bits + 2))
            reference = exp_reference(rounded, bits + 2)
            out = machine.apply(jittered_oracle(x, f"compose:{i}:{n}"), n).to_fraction()
            if abs(out - reference) + Fraction(1, 1 << bits) >= Fraction(1, 1 << n):
                raise InvariantViolation(f"|exp(expm1) output - reference| >= 2^-{n} at x={x}")
            runs += 1
    return f"{runs} evaluations within 2^-n; precision map n+8"


def check_cube_root_example(ctx: CheckContext) -> str:
    machine = cbrt_g_machine()
    rng = ctx.rng("cbrt")
    runs = 0
    for i in range(ctx.plan.cube_root_points):
        x = Dyadic(rng.randint(0, 1 << 40), -40)
        target = 1 - x.to_fraction() ** 3
        for n in ctx.plan.cube_root_precisions:
            lo, hi = cube_root_bracket(target, n + REFERENCE_BITS)
            out = machine.apply(jittered_oracle(x, f"cbrt:{i}:{n}"), n).to_fraction()
            if max(abs(out - lo), abs(out - hi)) >= Fraction(1, 1 << n):
                raise InvariantViolation(f"|cbrt(1 - x^3) output - root| >= 2^-{n} at x={x}")
            runs += 1
    return f"{runs} evaluations within 2^-n"


def check_pixel_soundness(ctx: CheckContext) -> str:
    checked = 0
    for name, decision, shape, window in primitive_cases(ctx.settings.threshold):
        for n in ctx.plan.soundness_levels:
            pixels = approximate_set(decision, n, window, workers=ctx.settings.workers)
            checked += audit_decisions(name, pixels, shape)
    return f"{checked} pixels obey the decision contract"


def check_distance_round_trip(ctx: CheckContext) -> str:
    rng = ctx.rng("round_trip")
    tolerance = Fraction(1, 64) + Fraction(1, 128)
    cases = [case for case in primitive_cases(ctx.settings.threshold) if case[0] in ("disk", "segment")]
    for name, decision, shape, window in cases:
        rebuilt = distance_from_pixels(decision, 9, window)
        for _ in range(ctx.plan.round_trip_points):
            point = (Dyadic(rng.randint(-3 << 11, 3 << 11), -12), Dyadic(rng.randint(-3 << 11, 3 << 11), -12))
            estimate = rebuilt.eval(point, 6).to_fraction()
            lo, hi = shape.bounds(_fraction_point(point))
            if max(abs(estimate - lo), abs(estimate - hi)) >= tolerance:
                raise InvariantViolation(
                    f"{name}: rebuilt distance off by >= 2^-6 + 2^-7 at {point[0]},{point[1]}"
                )
        for n in ctx.plan.hausdorff_levels:
            pixels = approximate_set(decision, n, window, workers=ctx.settings.workers)
            _check_hausdorff(name, pixels, shape, rng)
    return "distance -> pixels -> distance within 3/128; pixel sets within 4*2^-n"


def _set_samples(shape: RoundShape | SegmentShape, rng: random.Random, count: int, bits: int) -> np.ndarray:
    scale = 1 << bits
    points = []
    while len(points) < count:
        if isinstance(shape, RoundShape):
            x, y = rng.randint(-scale, scale), rng.randint(-scale, scale)
            if x * x + y * y > scale * scale:
                continue
        else:
            x, y = rng.randint(-scale, scale), 0
        points.append((x, y))
    return np.array(points, dtype=np.int64)


def _check_hausdorff(name: str, pixels: PixelSet, shape: RoundShape | SegmentShape, rng: random.Random) -> None:
    n = pixels.n
    limit = 4 * Fraction(1, 1 << n)
    for ix, iy in pixels.indices:
        if not shape.within(_fraction_point(pixels.point(ix, iy)), limit):
            raise InvariantViolation(f"{name} n={n}: kept pixel ({ix}, {iy}) is farther than 4*2^-n from the set")
    bits = 16
    centers = np.array(pixels.indices, dtype=np.int64) << (bits - pixels.spacing_exponent)
    samples = _set_samples(shape, rng, 200, bits)
    diff = samples[:, None, :] - centers[None, :, :]
    nearest = (diff * diff).sum(axis=2).min(axis=1).max()
    if int(nearest) > (4 << (bits - n)) ** 2:
        raise InvariantViolation(f"{name} n={n}: a point of the set is farther than 4*2^-n from every kept pixel")


def check_koch_convergence(ctx: CheckContext) -> str:
    steps = [koch_step_hausdorff(i) for i in range(1, ctx.plan.koch_steps + 1)]
    for step, following in zip(steps, steps[1:]):
        if not step.exact:
            raise InvariantViolation(f"Koch step bounds do not meet at level {step.level}")
        if following.upper_sq * 9 != step.upper_sq:
            raise InvariantViolation(f"d_H(K_i, K_i+1) ratio is not 1/3 at level {step.level}")

    n = ctx.plan.koch_render_n
    decision = pixel_from_distance(koch_distance(max_level=ctx.settings.koch_max_level), ctx.settings.threshold)
    pixels = approximate_set(decision, n, ComplexBox.around(ZERO, ZERO, Dyadic(5, -3)), workers=ctx.settings.workers)
    level = koch_level_for(n) + 2
    reference = koch_distance(i_auto=False, level=level, max_level=max(level, ctx.settings.koch_max_level))
    tail = Fraction(7, 16) / 3**level + Fraction(1, 1 << (n + 8))
    t = Fraction(1, 1 << n)
    for record in pixels.records:
        d = pixels.point(record.ix, record.iy)
        polygon = reference.eval(d, n + 8).to_fraction()
        if polygon + tail <= t and record.decision != 1:
            raise InvariantViolation(f"koch n={n}: decide=1 whenever d_S <= 2^-n fails at {d[0]},{d[1]}")
        if polygon - tail >= 2 * t and record.decision == 1:
            raise InvariantViolation(f"koch n={n}: decide=1 never when d_S >= 2*2^-n fails at {d[0]},{d[1]}")
    return f"ratio 1/3 exact over {len(steps)} levels; {len(pixels.records)} Koch pixels audited"


def _record_at(pixels: PixelSet, x: Dyadic, y: Dyadic):
    e = pixels.spacing_exponent
    ix, iy = x.shift(e).floor(), y.shift(e).floor()
    return next(record for record in pixels.records if (record.ix, record.iy) == (ix, iy))


def check_mandelbrot_one_sided(ctx: CheckContext) -> str:
    n = ctx.plan.mandel_n
    escape = replace(ctx.escape, t_max=ctx.escape.t_per_n * n)
    job = RenderJob("mandelbrot", (Dyadic(-3, -2), ZERO), n, Dyadic(3, -1), escape=escape)
    result = run_render(job, replace(ctx.settings, audit_samples=ctx.plan.audit_samples))
    if result.audit is not None and not result.audit.passed:
        raise InvariantViolation(f"mandelbrot n={n}: certified_out pixels failed sampling at {result.audit.failures[:3]}")
    for c in (ZERO, Dyadic(-1), Dyadic(-2)):
        if _record_at(result.pixels, c, ZERO).decision != 1:
            raise InvariantViolation(f"mandelbrot n={n}: the pixel at c={c} must decide 1")
    verdict = mandel_pixel(escape).verdict((ONE, ZERO), n)
    if verdict.diagnosis is not Diagnosis.CERTIFIED_OUT:
        raise InvariantViolation(f"mandelbrot n={n}: the pixel at c=1 must be certified_out")
    audited = result.audit.pixels if result.audit else 0
    return f"{audited} certified_out pixels survived sampling"


def check_julia_ground_truth(ctx: CheckContext) -> str:
    c = (oracle_from_dyadic(ZERO), oracle_from_dyadic(ZERO))
    window = ComplexBox.around(ZERO, ZERO, Dyadic(3, -1))
    checked = 0
    for n in ctx.plan.julia_levels:
        t = Fraction(1, 1 << n)
        boundary = julia_pixel(c, False, ctx.escape)
        filled = julia_pixel(c, True, ctx.escape)
        j_pixels = approximate_set(boundary, n, window, workers=ctx.settings.workers)
        k_pixels = approximate_set(filled, n, window, workers=ctx.settings.workers)
        for j_record, k_record in zip(j_pixels.records, k_pixels.records):
            x, y = _fraction_point(j_pixels.point(j_record.ix, j_record.iy))
            s = x * x + y * y
            if (1 - t) ** 2 <= s <= (1 + t) ** 2 and j_record.decision != 1:
                raise InvariantViolation(f"julia n={n}: J_0 pixel within 2^-n of the circle decided 0 at {x},{y}")
            if (s >= (1 + 3 * t) ** 2 or s <= (1 - 3 * t) ** 2) and j_record.decision != 0:
                raise InvariantViolation(f"julia n={n}: J_0 pixel 3*2^-n from the circle decided 1 at {x},{y}")
            if j_record.verdict.diagnosis is Diagnosis.CERTIFIED_OUT and (1 - 2 * t) ** 2 <= s <= (1 + 2 * t) ** 2:
                raise InvariantViolation(f"julia n={n}: certified_out J_0 pixel meets the circle's 2*2^-n ring")
            if k_record.verdict.diagnosis is Diagnosis.CERTIFIED_IN and s > 1:
                raise InvariantViolation(f"julia n={n}: certified_in K_0 pixel outside the closed unit disk")
            if k_record.verdict.diagnosis is Diagnosis.CERTIFIED_OUT and s <= (1 + 2 * t) ** 2:
                raise InvariantViolation(f"julia n={n}: certified_out K_0 pixel meets the closed unit disk")
            checked += 1
    return f"{checked} J_0/K_0 pixel pairs agree with the unit circle"


def check_polynomial_cost(ctx: CheckContext) -> str:
    ns = ctx.plan.cost_precisions
    fits = []
    for set_id in ("disk", "koch", "julia"):
        fit = fit_cost(ns, measure_cost(set_id, ns, settings=ctx.settings, escape=ctx.escape))
        if not fit.polynomial():
            raise InvariantViolation(
                f"{set_id}: per-pixel cost is not fit by a degree-{fit.degree} polynomial "
                f"(residual {fit.max_relative_residual:.0%})"
            )
        fits.append(f"{set_id} slope {fit.loglog_slope:.2f}")
    return "; ".join(fits)


def check_determinism(ctx: CheckContext) -> str:
    jobs = [
        RenderJob("disk", (ZERO, ZERO), 4, Dyadic(3, -1)),
        RenderJob("julia", (ZERO, ZERO), 3, Dyadic(3, -1), shape=ShapeParams(filled=True)),
    ]
    settings = replace(ctx.settings, audit_samples=0)
    with tempfile.TemporaryDirectory(prefix="bitcanvas-") as tmp:
        for job in jobs:
            first = write_render(run_render(job, settings), Path(tmp) / f"{job.set_id}-a")
            second = write_render(run_render(job, settings), Path(tmp) / f"{job.set_id}-b")
            for kind in ("pgm", "csv"):
                if first[kind].read_bytes() != second[kind].read_bytes():
                    raise InvariantViolation(f"{job.set_id}: two renders produced different {kind} files")
    return f"{len(jobs)} renders byte-identical"


Suite = Callable[[CheckContext], str]

SUITES: dict[str, Suite] = {
    "exp_budget": check_exp_budget,
    "composition_budget": check_composition_budget,
    "cube_root_example": check_cube_root_example,
    "pixel_soundness": check_pixel_soundness,
    "distance_round_trip": check_distance_round_trip,
    "koch_convergence": check_koch_convergence,
    "mandelbrot_one_sided": check_mandelbrot_one_sided,
    "julia_ground_truth": check_julia_ground_truth,
    "polynomial_cost": check_polynomial_cost,
    "determinism": check_determinism,
}


def run_suite(name: str, ctx: CheckContext) -> CheckResult:
    started = time.perf_counter()
    try:
        detail = SUITES[name](ctx)
        passed = True
    except BitCanvasError as exc:
        detail, passed = str(exc), False
        logger.warning("selfcheck %s failed: %s", name, exc)
    return CheckResult(name, passed, detail, time.perf_counter() - started)


def run_selfcheck(
    level: str = "quick",
    settings: RenderSettings = RenderSettings(),
    escape: EscapeParams = EscapeParams(),
    only: tuple[str, ...] = (),
) -> list[CheckResult]:
    plan = PLANS[level]
    ctx = CheckContext(plan, settings, escape)
    names = [name for name in SUITES if not only or name in only]
    if not plan.cost_precisions:
        names = [name for name in names if name != "polynomial_cost"]
    logger.info("selfcheck %s: running %s", level, ", ".join(names))
    return [run_suite(name, ctx) for name in names]
