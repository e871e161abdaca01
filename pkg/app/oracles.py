"""Computable reals presented as precision oracles.

A :class:`RealOracle` answers ``query(n)`` with a dyadic strictly within
2^-n of the real it represents. The combinators here (arithmetic, division,
exponential, roots, constants) derive operand precisions so that each result
keeps that contract.
"""
from __future__ import annotations

import logging
import threading
from fractions import Fraction
from math import factorial
from typing import Callable

from .dyadic import (
    ONE,
    ZERO,
    Dyadic,
    Op,
    exact_arith,
    round_fraction,
    round_to,
    ulp,
)
from .exceptions import DomainViolation, SeparationError
from .utils.costs import charge, count_query, metered

logger = logging.getLogger(__name__)

DEFAULT_MAX_PROBE = 64
DOMAIN_SLACK_BITS = 4
GUARD_BITS = 2

Approximator = Callable[[int], Dyadic]


class RealOracle:
    """A real number x with ``|query(n) - x| < 2^-n`` for every n >= 0.

    Answers are memoized per precision so repeated queries are identical. A
    request for precision n can be served by rounding a memoized answer of
    precision at least n + 1.
    """

    def __init__(
        self,
        approximate: Approximator,
        description: str = "real",
        metadata: dict | None = None,
    ):
        self._approximate = approximate
        self.description = description
        self.metadata = dict(metadata or {})
        self.query_count = 0
        self.bit_ops = 0
        self.precisions: set[int] = set()
        self._memo: dict[int, Dyadic] = {}
        self._lock = threading.RLock()

    def query(self, n: int) -> Dyadic:
        if n < 0:
            raise ValueError("precision must be non-negative")
        with self._lock:
            self.query_count += 1
            self.precisions.add(n)
            answer = self._memo.get(n)
            if answer is None:
                answer = self._reuse(n)
                if answer is not None:
                    logger.debug("%s: precision %d served from a finer answer", self.description, n)
            if answer is None:
                with metered() as meter:
                    answer = self._approximate(n)
                self.bit_ops += meter.bit_ops
            self._memo[n] = answer
        charge(max(n, answer.bit_length()))
        count_query()
        return answer

    def _reuse(self, n: int) -> Dyadic | None:
        finer = [m for m in self._memo if m >= n + 1]
        if not finer:
            return None
        # |cached - x| < 2^-(n+1) and rounding adds at most 2^-(n+1)
        return round_to(self._memo[min(finer)], n + 1)

    def counters(self) -> dict[str, int]:
        return {
            "queries": self.query_count,
            "bit_ops": self.bit_ops,
            "max_precision": max(self.precisions, default=0),
        }

    def __repr__(self) -> str:
        return f"RealOracle({self.description})"


def oracle_from_dyadic(q: Dyadic | int) -> RealOracle:
    q = Dyadic.of(q)
    return RealOracle(lambda n: round_to(q, n + 1), description=str(q))


def magnitude_bound(x: RealOracle) -> Dyadic:
    """A dyadic B with |x| <= B."""
    return abs(x.query(0)) + ONE


def _log2_ceil_int(value: int) -> int:
    return max(0, (value - 1).bit_length())


def oracle_arith(a: RealOracle, b: RealOracle, op: Op | str) -> RealOracle:
    """Sum, difference or product of two oracles."""
    op = Op(op)
    label = f"({a.description} {op.value} {b.description})"

    if op in (Op.ADD, Op.SUB):

        def approximate(n: int) -> Dyadic:
            # two operand errors of 2^-(n+2) plus rounding at 2^-(n+3)
            exact = exact_arith(a.query(n + 2), b.query(n + 2), op)
            return round_to(exact, n + 2)

        return RealOracle(approximate, description=label)

    def approximate_product(n: int) -> Dyadic:
        bound_a, bound_b = magnitude_bound(a), magnitude_bound(b)
        # |ab - qa qb| <= |a||b - qb| + |qb||a - qa|, with |qb| <= |b| + 1
        extra_a = (bound_b + ONE).ceil_log2()
        extra_b = bound_a.ceil_log2()
        qa = a.query(n + 2 + max(0, extra_a))
        qb = b.query(n + 2 + max(0, extra_b))
        return round_to(qa * qb, n + 2)

    return RealOracle(approximate_product, description=label)


def oracle_neg(x: RealOracle) -> RealOracle:
    return RealOracle(lambda n: -x.query(n), description=f"-{x.description}")


def oracle_shift(x: RealOracle, k: int) -> RealOracle:
    """x * 2^k."""

    def approximate(n: int) -> Dyadic:
        return x.query(max(0, n + k)).shift(k)

    return RealOracle(approximate, description=f"({x.description} * 2^{k})")


def oracle_power(x: RealOracle, exponent: int) -> RealOracle:
    if exponent < 0:
        raise ValueError("negative exponent")
    if exponent == 0:
        return oracle_from_dyadic(ONE)
    result = x
    for _ in range(exponent - 1):
        result = oracle_arith(result, x, Op.MUL)
    return result


def quotient_round(a: Dyadic, b: Dyadic, p: int) -> Dyadic:
    """a / b rounded to the nearest multiple of 2^-p."""
    if b.is_zero():
        raise ZeroDivisionError("dyadic quotient by zero")
    charge(max(a.bit_length(), b.bit_length(), p) ** 2)
    return round_fraction(a.to_fraction() / b.to_fraction(), p)


def separate_from_zero(b: RealOracle, max_probe: int = DEFAULT_MAX_PROBE) -> tuple[Dyadic, int]:
    """Find L > 0 with |b| >= L by probing k = 0, 1, ... until |q_k| > 2 * 2^-k."""
    for k in range(max_probe + 1):
        qb = abs(b.query(k))
        if qb > ulp(k - 1):
            return qb - ulp(k), k
    raise SeparationError(
        f"cannot separate divisor from zero at precision {max_probe}"
    )


def oracle_div(a: RealOracle, b: RealOracle, max_probe: int = DEFAULT_MAX_PROBE) -> RealOracle:
    """a / b, after certifying that b stays away from zero.

    The separation probe runs eagerly; the depth it reached is recorded in
    ``metadata["probe_depth"]``.
    """
    lower, depth = separate_from_zero(b, max_probe)
    if depth > max_probe // 2:
        logger.warning("divisor %s separated only at precision %d", b.description, depth)
    inv_bits = -lower.floor_log2()

    def approximate(n: int) -> Dyadic:
        bound = magnitude_bound(a) + ONE
        ma = max(0, n + 2 + inv_bits)
        mb = max(
            n + 3 + max(0, bound.ceil_log2()) + 2 * inv_bits,
            1 + inv_bits,
            0,
        )
        return quotient_round(a.query(ma), b.query(mb), n + 2)

    return RealOracle(
        approximate,
        description=f"({a.description} / {b.description})",
        metadata={"probe_depth": depth, "separation": lower},
    )


def probe_domain(
    x: RealOracle,
    lo: Dyadic,
    hi: Dyadic,
    label: str = "function",
    slack_bits: int = DOMAIN_SLACK_BITS,
) -> None:
    """Reject x when a coarse query proves it lies outside [lo, hi] plus slack."""
    probe = slack_bits + 2
    q = x.query(probe)
    allowance = ulp(slack_bits) + ulp(probe)
    if q < lo - allowance or q > hi + allowance:
        raise DomainViolation(
            f"{label}: argument {x.description} ~ {q.to_decimal()} outside "
            f"[{lo.to_decimal()}, {hi.to_decimal()}]"
        )


def _divide_by_int(x: Dyadic, k: int, p: int) -> Dyadic:
    charge(max(x.bit_length(), p))
    return round_fraction(x.to_fraction() / k, p)


def exp_series(q: Dyadic, n: int, guard_bits: int = GUARD_BITS) -> Dyadic:
    """e^q within 2^-n for a dyadic |q| <= 9/8.

    Sums max(n + 1, 5) Taylor terms with each term rounded at a working
    precision that absorbs the accumulated rounding, then rounds the sum at
    2^-(n + 2 + guard_bits).
    """
    terms = max(n + 1, 5)
    work = n + 2 + guard_bits + _log2_ceil_int(terms + 1)
    term = ONE
    total = ONE
    for k in range(1, terms + 1):
        term = _divide_by_int(term * q, k, work)
        total = total + term
    return round_to(total, n + 2 + guard_bits)


EXP_DOMAIN = (Dyadic(-1), Dyadic(1))


def exp_oracle(x: RealOracle) -> RealOracle:
    """e^x for x in [-1, 1]; arguments witnessed outside the slack are rejected."""
    probe_domain(x, *EXP_DOMAIN, label="exp")

    def approximate(n: int) -> Dyadic:
        # e^x <= e^(9/8) < 4, so an input error of 2^-(n+4) moves e^x by < 2^-(n+2)
        return exp_series(x.query(n + 4), n)

    return RealOracle(approximate, description=f"exp({x.description})")


def _root_certified(lam: Dyadic, q: Dyadic, k: int, delta: Dyadic) -> bool:
    low = lam - delta
    if low > ZERO and low**k > q:
        return False
    return q <= (lam + delta) ** k


def _bisect_root(q: Dyadic, k: int, p: int) -> Dyadic:
    lo, hi = ZERO, max(ONE, q)
    tolerance = ulp(p)
    while hi - lo > tolerance:
        mid = (lo + hi).shift(-1)
        if mid**k <= q:
            lo = mid
        else:
            hi = mid
    return lo


def dyadic_root(q: Dyadic, k: int, p: int, method: str = "newton") -> Dyadic:
    """A dyadic within 2^-p of the real k-th root of q >= 0.

    Newton iterates are rounded at 2^-(p + 4) and the candidate is certified by
    bracketing q between (lam - 2^-(p+1))^k and (lam + 2^-(p+1))^k. Bisection
    is used when asked for, or when the Newton candidate fails certification.
    """
    if k < 1:
        raise ValueError("root index must be positive")
    if q <= ZERO:
        return ZERO
    if k == 1:
        return round_to(q, p)
    if method == "newton":
        work = p + 4
        lam = max(ONE, q)
        tolerance = ulp(work)
        for _ in range(4 * work + 64):
            if lam <= ZERO:
                break
            derivative = k * lam ** (k - 1)
            step = quotient_round(lam**k - q, derivative, work + 1)
            nxt = round_to(lam - step, work)
            done = abs(nxt - lam) <= tolerance
            lam = nxt
            if done:
                break
        candidate = round_to(lam, p + 1)
        if _root_certified(candidate, q, k, ulp(p + 1)):
            return candidate
        logger.debug("newton root of %s failed certification, bisecting", q)
    return _bisect_root(q, k, p)


ROOT_DOMAIN = (ZERO, ONE)


def newton_root(x: RealOracle, k: int) -> RealOracle:
    """The k-th root of x for x in [0, 1].

    When a probe separates x from zero the root is Lipschitz near x and a
    modest input precision suffices; otherwise the Hölder bound forces
    precision k(n + 3) and the root is found by bisection.
    """
    probe_domain(x, *ROOT_DOMAIN, label=f"root{k}")

    def approximate(n: int) -> Dyadic:
        s = n + 2
        qs = x.query(s)
        if qs > ulp(s - 1):
            lower = qs - ulp(s)
            f = lower.floor_log2()
            lipschitz_bits = -((-(1 - f) * (k - 1)) // k)
            m = max(n + 3 + lipschitz_bits, 1 - f, 0)
            lam = dyadic_root(max(ZERO, x.query(m)), k, n + 3, method="newton")
        else:
            lam = dyadic_root(max(ZERO, x.query(k * (n + 3))), k, n + 3, method="bisect")
        return round_to(lam, n + 2)

    return RealOracle(approximate, description=f"root{k}({x.description})")


def root_oracle(x: RealOracle, k: int) -> RealOracle:
    """k-th root of any x >= 0, scaling into [0, 1] by a power of 2^k first."""
    bound = magnitude_bound(x)
    scale = 0 if bound <= ONE else -((-bound.ceil_log2()) // k)
    if scale == 0:
        return newton_root(x, k)
    return oracle_shift(newton_root(oracle_shift(x, -k * scale), k), scale)


def _e_approx(n: int) -> Dyadic:
    # tail after the 1/N! term is below 2/(N+1)!
    terms = 1
    while factorial(terms + 1) < 1 << (n + 3):
        terms += 1
    total = sum((Fraction(1, factorial(j)) for j in range(terms + 1)), Fraction(0))
    return round_fraction(total, n + 2)


def _arctan_inverse(m: int, bits: int) -> Fraction:
    """arctan(1/m) with an alternating-series error below 2^-bits."""
    total = Fraction(0)
    j = 0
    power = Fraction(1, m)
    while True:
        total += Fraction((-1) ** j, 2 * j + 1) * power
        power /= m * m
        j += 1
        if power / (2 * j + 1) < Fraction(1, 1 << bits):
            return total


def _pi_machin(n: int) -> Dyadic:
    bits = n + 8
    value = 16 * _arctan_inverse(5, bits) - 4 * _arctan_inverse(239, bits)
    return round_fraction(value, n + 2)


def _pi_euler(n: int) -> Dyadic:
    bits = n + 8
    value = 4 * (_arctan_inverse(2, bits) + _arctan_inverse(3, bits))
    return round_fraction(value, n + 2)


PI_METHODS: dict[str, Approximator] = {"machin": _pi_machin, "euler": _pi_euler}


def pi_oracle(method: str = "machin") -> RealOracle:
    try:
        approximate = PI_METHODS[method]
    except KeyError:
        raise ValueError(f"unknown pi method {method!r}") from None
    return RealOracle(approximate, description="pi")


def _one_third(n: int) -> Dyadic:
    bits = n + 1 + (n + 1) % 2
    return Dyadic((4 ** (bits // 2) - 1) // 3, -bits)


CONSTANTS = ("e", "pi", "sqrt2", "one_third")


def const_oracle(name: str) -> RealOracle:
    if name == "e":
        return RealOracle(_e_approx, description="e")
    if name == "pi":
        return pi_oracle("machin")
    if name == "sqrt2":
        root = newton_root(oracle_from_dyadic(Dyadic(1, -1)), 2)
        shifted = oracle_shift(root, 1)
        shifted.description = "sqrt2"
        return shifted
    if name == "one_third":
        return RealOracle(_one_third, description="one_third")
    raise ValueError(f"unknown constant {name!r}; expected one of {', '.join(CONSTANTS)}")
