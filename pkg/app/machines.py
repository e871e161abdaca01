"""Function machines: a precision map plus a dyadic kernel over a closed domain.

A machine for f promises that for every x in its domain and every dyadic q
with |x - q| < 2^-m(n), |kernel(q, n) - f(x)| < 2^-n. Every machine built
here also carries an interval enclosure of f, used by :func:`compose` to
check ranges and by :func:`graph_distance` to prune sampling.
"""
from __future__ import annotations

import heapq
import itertools
import logging
from dataclasses import dataclass
from typing import Callable

from .dyadic import ONE, ZERO, Dyadic, round_down, round_to, round_up, sqrt_ceil, sqrt_floor, ulp
from .exceptions import DomainViolation, RangeContainmentError, SampleBudgetExceeded
from .interval import ComplexBox, DyInterval
from .oracles import DOMAIN_SLACK_BITS, RealOracle, dyadic_root, exp_series, probe_domain
from .sets import DistOracle, Point, segment_distance_squared

logger = logging.getLogger(__name__)

RANGE_CHECK_PRECISION = 24
DEFAULT_GRAPH_SAMPLE_BUDGET = 200_000
# covers everything probe_domain lets through (2^-4 plus its probe ulp)
SLACK = ulp(DOMAIN_SLACK_BITS - 1)

PrecisionMap = Callable[[int], int]
Kernel = Callable[[Dyadic, int], Dyadic]
Enclosure = Callable[[DyInterval, int], DyInterval]


@dataclass(frozen=True)
class FuncMachine:
    precision_map: PrecisionMap
    kernel: Kernel
    domain: DyInterval
    enclosure: Enclosure | None = None
    description: str = "f"
    # inputs on which the kernel's error bound still holds; defaults to the domain
    accepts: DyInterval | None = None

    @property
    def kernel_domain(self) -> DyInterval:
        return self.domain if self.accepts is None else self.accepts

    def evaluate(self, q: Dyadic, n: int) -> Dyadic:
        """Run the kernel on a dyadic approximation served at precision m(n).

        A q just outside the kernel domain is rounding noise from an x on its
        edge and is clamped. Anything further out witnesses an argument the
        kernel cannot serve to 2^-n.
        """
        accepted = self.kernel_domain
        if not accepted.contains(q):
            if accepted.distance_to(q) >= ulp(self.precision_map(n)):
                raise DomainViolation(
                    f"{self.description}: input {q.to_decimal()} outside {accepted}"
                )
            q = accepted.clamp(q)
        return self.kernel(q, n)

    def apply(self, phi: RealOracle, n: int) -> Dyadic:
        probe_domain(phi, self.domain.lo, self.domain.hi, label=self.description)
        q = phi.query(self.precision_map(n))
        return self.evaluate(q, n)

    def as_oracle(self, phi: RealOracle) -> RealOracle:
        probe_domain(phi, self.domain.lo, self.domain.hi, label=self.description)
        return RealOracle(
            lambda n: self.evaluate(phi.query(self.precision_map(n)), n),
            description=f"{self.description}({phi.description})",
        )

    def enclose(self, interval: DyInterval, p: int) -> DyInterval | None:
        if self.enclosure is None:
            return None
        return self.enclosure(interval, p)


UNIT = DyInterval(ZERO, ONE)


def identity_machine(domain: DyInterval = UNIT) -> FuncMachine:
    return FuncMachine(
        precision_map=lambda n: n + 1,
        kernel=lambda q, n: round_to(q, n + 1),
        domain=domain,
        enclosure=lambda interval, p: interval,
        description="identity",
        accepts=domain.inflate(SLACK),
    )


def constant_machine(c: Dyadic | int, domain: DyInterval = UNIT) -> FuncMachine:
    c = Dyadic.of(c)
    return FuncMachine(
        precision_map=lambda n: 0,
        kernel=lambda q, n: round_to(c, n + 1),
        domain=domain,
        enclosure=lambda interval, p: DyInterval.point(c),
        description=f"const({c})",
        accepts=domain.inflate(SLACK),
    )


def g_machine() -> FuncMachine:
    """g(x) = 1 - x^3 on [0, 1]."""

    def kernel(q: Dyadic, n: int) -> Dyadic:
        # 3 * 2^-(n+2) from the input (|g'| <= 3) plus 2^-(n+3) from rounding
        return round_to(ONE - q**3, n + 2)

    def enclosure(interval: DyInterval, p: int) -> DyInterval:
        return DyInterval(ONE - interval.hi**3, ONE - interval.lo**3).round_out(p)

    return FuncMachine(lambda n: n + 2, kernel, UNIT, enclosure, "g")


def _root_enclosure(k: int) -> Enclosure:
    def enclosure(interval: DyInterval, p: int) -> DyInterval:
        lo = max(ZERO, dyadic_root(max(ZERO, interval.lo), k, p) - ulp(p))
        hi = dyadic_root(max(ZERO, interval.hi), k, p) + ulp(p)
        return DyInterval(lo, hi)

    return enclosure


def root_machine(k: int) -> FuncMachine:
    """x -> x^(1/k) on [0, 1]; the Hölder bound needs input precision k(n + 3).

    The bound |x^(1/k) - q^(1/k)| <= |x - q|^(1/k) holds for all x, q >= 0, so
    arguments just above 1 are served as they are. Negative ones are not.
    """

    def kernel(q: Dyadic, n: int) -> Dyadic:
        return round_to(dyadic_root(q, k, n + 3), n + 2)

    return FuncMachine(
        lambda n: k * (n + 3),
        kernel,
        UNIT,
        _root_enclosure(k),
        f"root{k}",
        accepts=DyInterval(ZERO, ONE + SLACK),
    )


def cuberoot_machine() -> FuncMachine:
    return root_machine(3)


def sqrt_machine() -> FuncMachine:
    return root_machine(2)


def _exp_enclosure(offset: Dyadic) -> Enclosure:
    def enclosure(interval: DyInterval, p: int) -> DyInterval:
        lo = round_down(exp_series(interval.lo, p) - ulp(p) - offset, p)
        hi = round_up(exp_series(interval.hi, p) + ulp(p) - offset, p)
        return DyInterval(lo, hi)

    return enclosure


def exp_machine() -> FuncMachine:
    """e^x on [-1, 1] with input precision n + 4.

    e^(9/8) < 4, so the map also covers arguments in the probe slack.
    """
    domain = DyInterval(Dyadic(-1), ONE)
    return FuncMachine(
        precision_map=lambda n: n + 4,
        kernel=exp_series,
        domain=domain,
        enclosure=_exp_enclosure(ZERO),
        description="exp",
        accepts=domain.inflate(SLACK),
    )


def expm1_machine() -> FuncMachine:
    """e^x - 1 on [-1, 1/2]; e^x < 2 up to 5/8, so input precision n + 3 suffices."""
    domain = DyInterval(Dyadic(-1), Dyadic(1, -1))
    return FuncMachine(
        precision_map=lambda n: n + 3,
        kernel=lambda q, n: exp_series(q, n + 1) - ONE,
        domain=domain,
        enclosure=_exp_enclosure(ONE),
        description="expm1",
        accepts=domain.inflate(SLACK),
    )


def compose(mf: FuncMachine, mg: FuncMachine) -> FuncMachine:
    """Machine for f o g, chaining the kernels with one guard bit."""
    if mg.enclosure is None:
        raise RangeContainmentError(f"{mg.description} has no range enclosure")
    rng = mg.enclosure(mg.domain, RANGE_CHECK_PRECISION)
    if not rng.issubset(mf.domain):
        raise RangeContainmentError(
            f"range {rng} of {mg.description} is not inside domain {mf.domain} of {mf.description}"
        )

    def precision_map(n: int) -> int:
        return mg.precision_map(mf.precision_map(n) + 1)

    def kernel(q: Dyadic, n: int) -> Dyadic:
        inner = mg.evaluate(q, mf.precision_map(n) + 1)
        return mf.evaluate(inner, n)

    enclosure: Enclosure | None = None
    if mf.enclosure is not None:

        def enclosure(interval: DyInterval, p: int) -> DyInterval:
            inner = mg.enclosure(interval, p)
            clipped = inner.intersection(mf.domain) or DyInterval.point(mf.domain.clamp(inner.lo))
            return mf.enclosure(clipped, p)

    return FuncMachine(
        precision_map,
        kernel,
        mg.domain,
        enclosure,
        f"{mf.description}({mg.description})",
        accepts=mg.kernel_domain,
    )


def cbrt_g_machine() -> FuncMachine:
    """x -> cube root of (1 - x^3) on [0, 1]."""
    return compose(cuberoot_machine(), g_machine())


def exp_expm1_machine() -> FuncMachine:
    return compose(exp_machine(), expm1_machine())


MACHINES: dict[str, Callable[[], FuncMachine]] = {
    "identity": identity_machine,
    "zero": lambda: constant_machine(ZERO),
    "g": g_machine,
    "cbrt": cuberoot_machine,
    "sqrt": sqrt_machine,
    "exp": exp_machine,
    "expm1": expm1_machine,
    "cbrt_g": cbrt_g_machine,
    "exp_expm1": exp_expm1_machine,
}


def get_machine(machine_id: str) -> FuncMachine:
    try:
        return MACHINES[machine_id]()
    except KeyError:
        raise KeyError(f"unknown machine {machine_id!r}") from None


def _squared_distance_to_box(point: Point, xs: DyInterval, ys: DyInterval) -> Dyadic:
    return ComplexBox(xs, ys).distance_squared_to(*point)


def graph_distance(
    machine: FuncMachine,
    sample_budget: int = DEFAULT_GRAPH_SAMPLE_BUDGET,
) -> DistOracle:
    """Distance oracle for the graph {(x, f(x)) : x in domain}.

    Branch and bound over domain pieces. A piece I contributes the lower
    bound dist(P, I x E), where E is the machine's enclosure over I, narrowed
    to [y_s - 2^-j, y_s + 2^-j] once I is finer than 2^-m(j) around its
    sample x_s (the precision map serving as modulus of continuity). Samples
    give upper bounds; the search stops when the two agree to 2^-(n+1).
    """
    domain = machine.domain
    whole = machine.enclose(domain, 8)
    bound_box = ComplexBox(domain, whole) if whole is not None else None

    def evaluate(point: Point, n: int) -> Dyadic:
        j = n + 3
        p = n + 4
        resolved = ulp(machine.precision_map(j))
        slack = ulp(j)
        tolerance = ulp(n + 1)
        samples = 0
        counter = itertools.count()
        best_upper: Dyadic | None = None
        heap: list[tuple[Dyadic, int, DyInterval]] = []

        def visit(piece: DyInterval) -> None:
            nonlocal samples, best_upper
            samples += 1
            if samples > sample_budget:
                raise SampleBudgetExceeded(
                    f"graph of {machine.description}: tolerance 2^-{n + 1} not reached "
                    f"within {sample_budget} samples"
                )
            xs = piece.midpoint()
            ys = machine.evaluate(xs, j)
            upper = sqrt_ceil(segment_distance_squared(point, (xs, ys), (xs, ys)), p) + slack
            if best_upper is None or upper < best_upper:
                best_upper = upper
            heights = machine.enclose(piece, p)
            if piece.width() <= resolved:
                band = DyInterval.around(ys, slack)
                heights = band if heights is None else (heights.intersection(band) or band)
            if heights is None:
                gap = piece.distance_to(point[0])
                lower = gap
            else:
                lower = sqrt_floor(_squared_distance_to_box(point, piece, heights), p)
            heapq.heappush(heap, (lower, next(counter), piece))

        visit(domain)
        while True:
            lower, _, piece = heapq.heappop(heap)
            if best_upper - lower <= tolerance:
                if samples > sample_budget // 2:
                    logger.warning(
                        "graph of %s used %d of %d samples at precision %d",
                        machine.description,
                        samples,
                        sample_budget,
                        n,
                    )
                return round_to((lower + best_upper).shift(-1), n + 1)
            for half in piece.split():
                visit(half)

    return DistOracle(evaluate, bound_box, description=f"graph({machine.description})")


def step_graph(window: ComplexBox) -> DistOracle:
    """The graph of the unit step, clipped to a window: two horizontal segments.

    Points with x < 0 map to 0 and x >= 0 to 1; no vertical connector is drawn.
    The lower segment is closed at x = 0 since the set's closure is what a
    distance function sees.
    """
    xlo, xhi = window.re.lo, window.re.hi
    pieces: list[tuple[Point, Point]] = []
    if xlo < ZERO:
        pieces.append(((xlo, ZERO), (min(ZERO, xhi), ZERO)))
    if xhi >= ZERO:
        pieces.append(((max(ZERO, xlo), ONE), (xhi, ONE)))

    def evaluate(point: Point, n: int) -> Dyadic:
        best = min(segment_distance_squared(point, a, b) for a, b in pieces)
        return sqrt_floor(best, n + 1)

    return DistOracle(evaluate, window, description="step")

