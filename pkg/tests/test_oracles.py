from __future__ import annotations

from fractions import Fraction

import pytest

from app.dyadic import ONE, ZERO, Dyadic
from app.exceptions import DomainViolation, SeparationError
from app.oracles import (
    CONSTANTS,
    RealOracle,
    const_oracle,
    dyadic_root,
    exp_oracle,
    exp_series,
    newton_root,
    oracle_arith,
    oracle_div,
    oracle_from_dyadic,
    oracle_neg,
    oracle_power,
    oracle_shift,
    pi_oracle,
    probe_domain,
    root_oracle,
    separate_from_zero,
)
from app.renderer import fit_cost
from app.selfcheck import cube_root_bracket, exp_reference, jittered_oracle
from app.utils.costs import metered

PI_DIGITS = Fraction("3.14159265358979323846264338327950288")


def _close(value: Dyadic, target: Fraction, n: int, slack: Fraction = Fraction(0)) -> bool:
    return abs(value.to_fraction() - target) + slack < Fraction(1, 2**n)


def test_memoized_answers_are_stable():
    oracle = const_oracle("one_third")
    first = oracle.query(12)
    assert oracle.query(12) == first
    assert oracle.query_count == 2
    assert 12 in oracle.precisions


def test_coarse_queries_reuse_finer_answers():
    calls = []

    def approximate(n):
        calls.append(n)
        return Dyadic(1, -2)

    oracle = RealOracle(approximate, description="quarter")
    oracle.query(20)
    oracle.query(3)
    assert calls == [20]
    assert oracle.counters()["max_precision"] == 20


def test_negative_precision_is_rejected():
    with pytest.raises(ValueError):
        oracle_from_dyadic(ONE).query(-1)


@pytest.mark.parametrize("n", [0, 5, 20, 40])
def test_sum_and_product(n):
    third = const_oracle("one_third")
    assert _close(oracle_arith(third, third, "add").query(n), Fraction(2, 3), n)
    assert _close(oracle_arith(third, third, "mul").query(n), Fraction(1, 9), n)
    assert _close(oracle_arith(oracle_from_dyadic(ONE), third, "sub").query(n), Fraction(2, 3), n)
    assert _close(oracle_neg(third).query(n), Fraction(-1, 3), n)
    assert _close(oracle_power(third, 3).query(n), Fraction(1, 27), n)
    assert _close(oracle_shift(third, 3).query(n), Fraction(8, 3), n)


@pytest.mark.parametrize("n", [0, 8, 30])
def test_division(n):
    quotient = oracle_div(oracle_from_dyadic(ONE), oracle_from_dyadic(Dyadic(3)))
    assert _close(quotient.query(n), Fraction(1, 3), n)
    assert quotient.metadata["probe_depth"] >= 0


def test_division_by_zero_cannot_be_separated():
    with pytest.raises(SeparationError, match="precision 8"):
        oracle_div(oracle_from_dyadic(ONE), oracle_from_dyadic(ZERO), max_probe=8)


def test_separation_probe_depth():
    lower, depth = separate_from_zero(oracle_from_dyadic(Dyadic(1, -3)))
    assert depth == 5
    assert lower == Dyadic(3, -5)


@pytest.mark.parametrize("x", [Dyadic(1, -1), Dyadic(-1), ONE, Dyadic(-3, -7)])
@pytest.mark.parametrize("n", [4, 16, 40])
def test_exp_oracle_against_taylor_reference(x, n):
    value = exp_oracle(jittered_oracle(x, f"{x}:{n}")).query(n)
    reference = exp_reference(x.to_fraction(), n + 30)
    assert _close(value, reference, n, Fraction(1, 2 ** (n + 30)))


def test_exp_series_on_a_dyadic():
    assert _close(exp_series(ZERO, 10), Fraction(1), 10)


def test_exp_rejects_arguments_outside_its_domain():
    with pytest.raises(DomainViolation):
        exp_oracle(oracle_from_dyadic(Dyadic(2)))


def test_probe_domain_names_the_function():
    with pytest.raises(DomainViolation, match="cbrt"):
        probe_domain(oracle_from_dyadic(Dyadic(-1)), ZERO, ONE, label="cbrt")


@pytest.mark.parametrize("n", [0, 10, 30])
def test_square_root_of_two(n):
    value = root_oracle(oracle_from_dyadic(Dyadic(2)), 2).query(n).to_fraction()
    step = Fraction(1, 2**n)
    assert (value - step) ** 2 < 2 < (value + step) ** 2


@pytest.mark.parametrize("n", [5, 20, 40])
def test_cube_root_on_the_unit_interval(n):
    x = Fraction(7, 8)
    value = newton_root(oracle_from_dyadic(Dyadic(7, -3)), 3).query(n).to_fraction()
    lo, hi = cube_root_bracket(x, n + 20)
    assert max(abs(value - lo), abs(value - hi)) < Fraction(1, 2**n)


def test_cube_root_of_zero_uses_bisection():
    assert abs(newton_root(oracle_from_dyadic(ZERO), 3).query(12)) < Dyadic(1, -12)


@pytest.mark.parametrize("method", ["newton", "bisect"])
def test_dyadic_root_certification(method):
    root = dyadic_root(Dyadic(27, -6), 3, 20, method=method)
    assert abs(root - Dyadic(3, -2)) <= Dyadic(1, -20)


def test_root_of_large_argument_scales_first():
    value = root_oracle(oracle_from_dyadic(Dyadic(64)), 3).query(16)
    assert abs(value - Dyadic(4)) < Dyadic(1, -16)


@pytest.mark.parametrize("n", [0, 20, 60])
def test_pi_methods_agree(n):
    machin, euler = pi_oracle("machin").query(n), pi_oracle("euler").query(n)
    assert _close(machin, PI_DIGITS, n, Fraction(1, 10**30))
    assert _close(euler, PI_DIGITS, n, Fraction(1, 10**30))


def test_unknown_pi_method():
    with pytest.raises(ValueError):
        pi_oracle("leibniz")


@pytest.mark.parametrize("n", [1, 24, 50])
def test_named_constants(n):
    assert _close(const_oracle("e").query(n), exp_reference(Fraction(1), n + 30), n, Fraction(1, 2 ** (n + 30)))
    assert _close(const_oracle("one_third").query(n), Fraction(1, 3), n)
    root = const_oracle("sqrt2").query(n).to_fraction()
    step = Fraction(1, 2**n)
    assert (root - step) ** 2 < 2 < (root + step) ** 2
    assert set(CONSTANTS) == {"e", "pi", "sqrt2", "one_third"}


def test_exp_cost_grows_polynomially():
    ns = [8, 16, 32, 64]
    x = Dyadic(3037000499, -32)
    costs = []
    for n in ns:
        with metered() as meter:
            exp_oracle(oracle_from_dyadic(x)).query(n)
        costs.append(meter.bit_ops)
    assert all(cost > 0 for cost in costs)
    # doubling n multiplies the work by at most 2^4
    assert all(later <= 16 * earlier for earlier, later in zip(costs, costs[1:]))
    assert fit_cost(ns, costs).loglog_slope < 4
