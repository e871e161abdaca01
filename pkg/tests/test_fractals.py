from __future__ import annotations

from fractions import Fraction

import pytest

from app.dyadic import ONE, ZERO, Dyadic
from app.exceptions import LevelCapExceeded
from app.fractals import (
    EscapeParams,
    Outcome,
    Surd,
    audit_pixels,
    in_main_cardioid,
    in_period2_disk,
    julia_classify,
    julia_pixel,
    koch_distance,
    koch_level_for,
    koch_polygon,
    koch_step_hausdorff,
    mandel_escape,
    mandel_pixel,
    naive_mandel_pixel,
)
from app.interval import ComplexBox
from app.oracles import oracle_from_dyadic
from app.sets import Diagnosis, approximate_set

SQRT3 = Fraction("1.7320508075688772935274463415058723669")
ZERO_C = (oracle_from_dyadic(ZERO), oracle_from_dyadic(ZERO))


def test_surd_arithmetic():
    assert Surd(1, 1) * Surd(1, -1) == Surd(-2)
    assert Surd(-2, 1).sign() == -1
    assert Surd(2, -1).sign() == 1
    assert Surd(0, 1) > Surd(Fraction(17, 10))
    assert (Surd(1) / Surd(0, 1)) == Surd(0, Fraction(1, 3))
    assert abs(Surd(0, 1).approx(20).to_fraction() - SQRT3) < Fraction(1, 2**20)


def test_koch_polygon_levels():
    assert len(koch_polygon(0).vertices) == 3
    assert len(koch_polygon(2).vertices) == 48
    assert koch_polygon(2).edge_length == Fraction(1, 9)
    with pytest.raises(ValueError):
        koch_polygon(-1)
    with pytest.raises(LevelCapExceeded):
        koch_polygon(5, max_level=4)


def test_first_koch_step_is_the_bump_height():
    step = koch_step_hausdorff(0)
    assert step.exact
    # the bump apex sits sqrt(3)/6 above its edge
    assert (step.upper_sq - Fraction(1, 12)).sign() == 0


def test_koch_steps_shrink_by_a_third():
    steps = [koch_step_hausdorff(i) for i in range(1, 4)]
    assert all(step.exact for step in steps)
    for step, following in zip(steps, steps[1:]):
        assert following.upper_sq * 9 == step.upper_sq
    assert steps[0].enclose(16).width() <= Dyadic(1, -12)


@pytest.mark.parametrize(("n", "level"), [(0, 1), (4, 4), (6, 5)])
def test_koch_level_for(n, level):
    assert koch_level_for(n) == level


def test_koch_distance():
    koch = koch_distance()
    # the trisection points of the triangle's edges are a third from the centre
    assert abs(koch.eval((ZERO, ZERO), 6).to_fraction() - Fraction(1, 3)) < Fraction(1, 2**6)
    assert koch.eval((ZERO, Dyadic(37, -6)), 4) < Dyadic(1, -4)


def test_koch_level_cap():
    with pytest.raises(LevelCapExceeded, match="precision 10"):
        koch_distance(max_level=2).eval((ZERO, ZERO), 10)
    with pytest.raises(ValueError):
        koch_distance(i_auto=False)


def test_escape_params_validation():
    with pytest.raises(ValueError):
        EscapeParams(t_max=0)
    with pytest.raises(ValueError):
        EscapeParams(cycle_window=0)
    params = EscapeParams()
    assert params.mandel_cap(5) == 320
    assert EscapeParams(t_max=10).mandel_cap(5) == 10
    assert params.julia_cap(2) == 48
    assert params.working_precision(3) == 23


def test_cardioid_and_period_two_disk():
    assert in_main_cardioid(ZERO, ZERO)
    assert in_main_cardioid(Dyadic(1, -2), ZERO)
    assert not in_main_cardioid(Dyadic(1, -1), ZERO)
    assert in_period2_disk(Dyadic(-1), ZERO)
    assert not in_period2_disk(ZERO, ZERO)


def test_mandelbrot_pixels():
    mandel = mandel_pixel()
    assert mandel.diagnose((ONE, ZERO), 5) is Diagnosis.CERTIFIED_OUT
    assert mandel.diagnose((ZERO, ZERO), 5) is Diagnosis.CERTIFIED_IN
    assert mandel.diagnose((Dyadic(-1), ZERO), 5) is Diagnosis.CERTIFIED_IN
    assert mandel.decide((Dyadic(-2), ZERO), 5) == 1


def test_naive_mandelbrot_certifies_nothing():
    naive = naive_mandel_pixel()
    assert naive.verdict((ONE, ZERO), 4).decision == 0
    assert naive.verdict((ZERO, ZERO), 4).decision == 1
    assert naive.diagnose((ONE, ZERO), 4) is Diagnosis.UNDETERMINED


def test_filled_julia_of_zero():
    filled = julia_pixel(ZERO_C, filled=True)
    assert filled.diagnose((ZERO, ZERO), 4) is Diagnosis.CERTIFIED_IN
    assert filled.diagnose((Dyadic(2), ZERO), 4) is Diagnosis.CERTIFIED_OUT


def test_julia_set_of_zero_is_the_unit_circle():
    boundary = julia_pixel(ZERO_C, filled=False)
    assert boundary.diagnose((ZERO, ZERO), 4) is Diagnosis.CERTIFIED_OUT
    assert boundary.diagnose((Dyadic(2), ZERO), 4) is Diagnosis.CERTIFIED_OUT
    assert boundary.decide((ONE, ZERO), 4) == 1


def test_mandelbrot_audit_passes():
    params = EscapeParams(t_max=64)
    pixels = approximate_set(mandel_pixel(params), 2, ComplexBox.around(ZERO, ZERO, Dyadic(2)))
    report = audit_pixels(pixels, "mandelbrot", params, samples=5)
    assert report.pixels > 0
    assert report.samples == 5 * report.pixels
    assert report.passed


def test_audit_arguments():
    pixels = approximate_set(mandel_pixel(), 1, ComplexBox.around(Dyadic(2), ZERO, ONE))
    with pytest.raises(ValueError, match="koch"):
        audit_pixels(pixels, "koch")
    with pytest.raises(ValueError, match="parameter c"):
        audit_pixels(pixels, "julia")


@pytest.mark.parametrize(
    ("c", "t_max", "expected"),
    [(ONE, 3, "escaped(2)"), (ZERO, 50, "unknown"), (Dyadic(-2), 100, "unknown")],
)
def test_mandel_escape_on_point_parameters(c, t_max, expected):
    assert str(mandel_escape(ComplexBox.point(c, ZERO), t_max, 30)) == expected


def test_mandel_escape_needs_a_step():
    with pytest.raises(ValueError):
        mandel_escape(ComplexBox.point(ONE, ZERO), 0, 30)


@pytest.mark.parametrize(
    ("x", "expected"),
    [(Dyadic(1, -1), "attracted(1)"), (Dyadic(3), "escaped(1)"), (ONE, "unknown")],
)
def test_julia_classify_for_zero_parameter(x, expected):
    assert str(julia_classify(ZERO_C, ComplexBox.point(x, ZERO))) == expected


def test_julia_classify_shares_the_pixel_budgets():
    params = EscapeParams(a=0, b=1)
    half = ComplexBox.point(Dyadic(1, -1), ZERO)
    assert julia_classify(ZERO_C, half, params, n=4).outcome is Outcome.UNKNOWN
    filled = julia_pixel(ZERO_C, filled=True, params=params)
    assert filled.diagnose((Dyadic(1, -1), ZERO), 4) is Diagnosis.UNDETERMINED
    assert julia_pixel(ZERO_C, filled=True).diagnose((Dyadic(1, -1), ZERO), 4) is Diagnosis.CERTIFIED_IN


def _certified_out(decision, n: int, window: ComplexBox) -> set[tuple[int, int]]:
    pixels = approximate_set(decision, n, window)
    return {(r.ix, r.iy) for r in pixels.records if r.verdict.diagnosis is Diagnosis.CERTIFIED_OUT}


def test_more_effort_never_revokes_a_mandelbrot_certificate():
    window = ComplexBox.around(Dyadic(-1, -1), ZERO, Dyadic(2))
    low = _certified_out(mandel_pixel(EscapeParams(t_max=6, subdivision_budget=2)), 2, window)
    high = _certified_out(mandel_pixel(EscapeParams(t_max=64, subdivision_budget=64)), 2, window)
    assert low
    assert low <= high


def test_more_effort_never_revokes_a_julia_certificate():
    basilica = (oracle_from_dyadic(Dyadic(-1)), oracle_from_dyadic(ZERO))
    window = ComplexBox.around(ZERO, ZERO, Dyadic(2))
    for filled in (True, False):
        low = _certified_out(julia_pixel(basilica, filled, EscapeParams(a=1, b=4, subdivision_budget=2)), 2, window)
        high = _certified_out(julia_pixel(basilica, filled, EscapeParams()), 2, window)
        assert low
        assert low <= high
