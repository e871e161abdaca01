from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .dyadic import EXPONENT_LIMIT, ONE, ZERO, Dyadic, parse_dyadic
from .exceptions import JobValidationError
from .fractals import (
    KOCH_MAX_LEVEL,
    AuditReport,
    EscapeParams,
    audit_pixels,
    julia_pixel,
    koch_distance,
    mandel_pixel,
    naive_mandel_pixel,
)
from .interval import ComplexBox
from .machines import DEFAULT_GRAPH_SAMPLE_BUDGET, MACHINES, get_machine, graph_distance, step_graph
from .oracles import oracle_from_dyadic
from .sets import (
    DEFAULT_THRESHOLD,
    Diagnosis,
    PixelDecision,
    PixelSet,
    Point,
    approximate_set,
    circle_distance,
    disk_distance,
    pixel_from_distance,
    segment_distance,
)
from .utils.output import write_pgm, write_pixel_csv, write_stats

logger = logging.getLogger(__name__)

SET_IDS = ("koch", "mandelbrot", "julia", "disk", "circle", "segment", "step")
ESCAPE_SETS = ("mandelbrot", "julia")


@dataclass(frozen=True)
class ShapeParams:
    """Set parameters that are not escape budgets; ``origin`` is the centre of a disk or circle."""

    radius: Dyadic = ONE
    origin: Point = (ZERO, ZERO)
    c: Point = (ZERO, ZERO)
    start: Point = (Dyadic(-1), ZERO)
    end: Point = (ONE, ZERO)
    filled: bool = False
    naive: bool = False


@dataclass(frozen=True)
class RenderSettings:
    workers: int = 1
    threshold: Dyadic = DEFAULT_THRESHOLD
    graph_sample_budget: int = DEFAULT_GRAPH_SAMPLE_BUDGET
    koch_max_level: int = KOCH_MAX_LEVEL
    audit_samples: int = 100

    @classmethod
    def from_config(cls, config: Mapping) -> RenderSettings:
        return cls(
            workers=int(config.get("RENDER_WORKERS", 1)),
            threshold=parse_dyadic(str(config.get("PIXEL_THRESHOLD", "3/2^1"))),
            graph_sample_budget=int(config.get("GRAPH_SAMPLE_BUDGET", DEFAULT_GRAPH_SAMPLE_BUDGET)),
            koch_max_level=int(config.get("KOCH_MAX_LEVEL", KOCH_MAX_LEVEL)),
            audit_samples=int(config.get("AUDIT_SAMPLES", 100)),
        )


def escape_params_from_config(config: Mapping, **overrides) -> EscapeParams:
    values = {
        "a": int(config.get("JULIA_A", 8)),
        "b": int(config.get("JULIA_B", 32)),
        "subdivision_budget": int(config.get("SUBDIVISION_BUDGET", 64)),
        "cycle_window": int(config.get("CYCLE_WINDOW", 32)),
        "blowup": parse_dyadic(str(config.get("BLOWUP_WIDTH", "8"))),
        "t_per_n": int(config.get("MANDEL_T_PER_N", 64)),
        "precision_extra": int(config.get("WORKING_PRECISION_EXTRA", 20)),
    }
    values.update({key: value for key, value in overrides.items() if value is not None})
    return EscapeParams(**values)


@dataclass(frozen=True)
class RenderJob:
    set_id: str
    center: Point
    n: int
    half_width: Dyadic
    k: int = 0
    escape: EscapeParams = field(default_factory=EscapeParams)
    shape: ShapeParams = field(default_factory=ShapeParams)

    @property
    def spacing_exponent(self) -> int:
        return self.n + self.k

    @property
    def window(self) -> ComplexBox:
        return ComplexBox.around(self.center[0], self.center[1], self.half_width)

    def validate(self) -> None:
        if self.set_id not in SET_IDS and not self.set_id.startswith("graph:"):
            raise JobValidationError(f"unknown set {self.set_id!r}")
        if self.set_id.startswith("graph:") and self.set_id[6:] not in MACHINES:
            raise JobValidationError(
                f"unknown machine {self.set_id[6:]!r}; expected one of {', '.join(MACHINES)}"
            )
        if self.n < 0 or self.k < 0:
            raise JobValidationError("n and k must be non-negative")
        if self.spacing_exponent > EXPONENT_LIMIT // 2:
            raise JobValidationError("n + k outside the exponent range")
        if self.half_width <= ZERO:
            raise JobValidationError("half-width must be positive")
        e = self.spacing_exponent
        for label, value in (
            ("center x", self.center[0]),
            ("center y", self.center[1]),
            ("half-width", self.half_width),
        ):
            if not value.is_zero() and value.exponent + e < 0:
                raise JobValidationError(
                    f"{label} {value} is not on the 2^-{e} grid; the window must be grid-aligned"
                )


def build_decision(job: RenderJob, settings: RenderSettings = RenderSettings()) -> PixelDecision:
    shape = job.shape
    threshold = settings.threshold
    if job.set_id == "koch":
        return pixel_from_distance(koch_distance(max_level=settings.koch_max_level), threshold)
    if job.set_id == "mandelbrot":
        return naive_mandel_pixel(job.escape) if shape.naive else mandel_pixel(job.escape)
    if job.set_id == "julia":
        c = (oracle_from_dyadic(shape.c[0]), oracle_from_dyadic(shape.c[1]))
        return julia_pixel(c, shape.filled, job.escape)
    if job.set_id == "disk":
        return pixel_from_distance(disk_distance(shape.origin, shape.radius), threshold)
    if job.set_id == "circle":
        return pixel_from_distance(circle_distance(shape.origin, shape.radius), threshold)
    if job.set_id == "segment":
        return pixel_from_distance(segment_distance(shape.start, shape.end), threshold)
    if job.set_id == "step":
        return pixel_from_distance(step_graph(job.window), threshold)
    machine = get_machine(job.set_id[len("graph:"):])
    return pixel_from_distance(graph_distance(machine, settings.graph_sample_budget), threshold)


@dataclass
class RenderResult:
    job: RenderJob
    pixels: PixelSet
    elapsed: float
    audit: AuditReport | None = None

    def stats(self) -> dict[str, object]:
        records = self.pixels.records
        counts = self.pixels.counts()
        bit_ops = [record.bit_ops for record in records]
        window = self.pixels.window
        stats: dict[str, object] = {
            "set": self.job.set_id,
            "n": self.pixels.n,
            "k": self.pixels.k,
            "window": f"{window.re.lo},{window.re.hi},{window.im.lo},{window.im.hi}",
            "columns": self.pixels.columns,
            "rows": self.pixels.rows,
            "pixels": len(records),
            "decided_1": sum(record.decision for record in records),
        }
        stats.update(counts)
        stats.update(
            {
                "wall_time_s": f"{self.elapsed:.3f}",
                "bit_ops_total": sum(bit_ops),
                "bit_ops_mean": f"{(sum(bit_ops) / len(bit_ops)) if bit_ops else 0:.1f}",
                "subdivisions_total": sum(record.verdict.subdivisions for record in records),
                "touches_boundary": str(self.pixels.touches_boundary).lower(),
                "one_direction": "heuristic" if self.job.set_id in ESCAPE_SETS else "certified",
            }
        )
        if self.audit is not None:
            stats.update(
                {
                    "audit_pixels": self.audit.pixels,
                    "audit_samples": self.audit.samples,
                    "audit_failures": len(self.audit.failures),
                }
            )
        return stats


def _audit_kind(job: RenderJob) -> str | None:
    if job.set_id == "mandelbrot" and not job.shape.naive:
        return "mandelbrot"
    if job.set_id == "julia":
        return "julia_filled" if job.shape.filled else "julia"
    return None


def run_render(job: RenderJob, settings: RenderSettings = RenderSettings()) -> RenderResult:
    job.validate()
    decision = build_decision(job, settings)
    logger.info(
        "Rendering %s at n=%s k=%s over %s with %s workers",
        job.set_id,
        job.n,
        job.k,
        job.window,
        settings.workers,
    )
    started = time.perf_counter()
    pixels = approximate_set(decision, job.n, job.window, job.k, workers=settings.workers)
    elapsed = time.perf_counter() - started

    audit = None
    kind = _audit_kind(job)
    if kind is not None and settings.audit_samples > 0:
        c = None
        if job.set_id == "julia":
            c = (oracle_from_dyadic(job.shape.c[0]), oracle_from_dyadic(job.shape.c[1]))
        audit = audit_pixels(pixels, kind, job.escape, c=c, samples=settings.audit_samples)

    counts = pixels.counts()
    logger.info(
        "Rendered %s: %s pixels, %s certified out, %s certified in in %.2fs",
        job.set_id,
        len(pixels.records),
        counts[Diagnosis.CERTIFIED_OUT.value],
        counts[Diagnosis.CERTIFIED_IN.value],
        elapsed,
    )
    return RenderResult(job, pixels, elapsed, audit)


def write_render(result: RenderResult, prefix: Path | str, binary: bool = False) -> dict[str, Path]:
    prefix = Path(prefix)
    if prefix.parent and not prefix.parent.exists():
        prefix.parent.mkdir(parents=True, exist_ok=True)
    return {
        "pgm": write_pgm(result.pixels, prefix.with_name(prefix.name + ".pgm"), binary=binary),
        "csv": write_pixel_csv(result.pixels, prefix.with_name(prefix.name + ".csv")),
        "stats": write_stats(result.stats(), prefix.with_name(prefix.name + ".stats")),
    }


# -- screen-cost model -----------------------------------------------------------

COST_FOCUS: dict[str, tuple[str, Point, ShapeParams]] = {
    "disk": ("disk", (Dyadic(2), ZERO), ShapeParams(radius=Dyadic(2))),
    "circle": ("circle", (ONE, ZERO), ShapeParams()),
    "koch": ("koch", (ZERO, Dyadic(37, -6)), ShapeParams()),
    "julia": ("julia", (ONE, ZERO), ShapeParams()),
    "segment": ("segment", (ZERO, ZERO), ShapeParams()),
}


@dataclass(frozen=True)
class CostFit:
    ns: tuple[int, ...]
    means: tuple[float, ...]
    degree: int
    coefficients: tuple[float, ...]
    max_relative_residual: float
    loglog_slope: float

    def polynomial(self, tolerance: float = 0.2) -> bool:
        return self.max_relative_residual < tolerance


def measure_cost(
    set_id: str,
    ns: Sequence[int],
    window_bits: int = 3,
    settings: RenderSettings = RenderSettings(),
    escape: EscapeParams = EscapeParams(),
) -> list[float]:
    """Mean bit operations per pixel on a fixed 2^w x 2^w pixel window zooming into a boundary point."""
    if set_id not in COST_FOCUS:
        raise JobValidationError(f"no cost focus for {set_id!r}; expected one of {', '.join(COST_FOCUS)}")
    kind, center, shape = COST_FOCUS[set_id]
    means = []
    for n in ns:
        half_width = Dyadic(1, window_bits - 1 - n)
        job = RenderJob(kind, center, n, half_width, escape=escape, shape=shape)
        result = run_render(job, replace(settings, audit_samples=0))
        bit_ops = [record.bit_ops for record in result.pixels.records]
        means.append(sum(bit_ops) / len(bit_ops))
    return means


def fit_cost(ns: Sequence[int], means: Sequence[float], max_degree: int = 3) -> CostFit:
    """Least-squares polynomial of degree <= 3 in n, leaving at least one residual degree of freedom."""
    xs = np.asarray(ns, dtype=float)
    ys = np.asarray(means, dtype=float)
    degree = max(1, min(max_degree, len(xs) - 2))
    coefficients = np.polyfit(xs, ys, degree)
    fitted = np.polyval(coefficients, xs)
    residual = float(np.max(np.abs(fitted - ys) / np.maximum(ys, 1.0)))
    slope = float(np.polyfit(np.log(xs), np.log(np.maximum(ys, 1.0)), 1)[0])
    return CostFit(tuple(ns), tuple(float(y) for y in ys), degree, tuple(float(c) for c in coefficients), residual, slope)
