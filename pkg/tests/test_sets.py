from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from app.dyadic import ONE, ZERO, Dyadic
from app.exceptions import EmptySetError, PrecisionBudgetExceeded
from app.interval import ComplexBox
from app.sets import (
    Diagnosis,
    PixelRecord,
    PixelSet,
    Verdict,
    approximate_set,
    circle_distance,
    disk_distance,
    distance_from_pixels,
    hausdorff_pixels,
    pixel_from_distance,
    polygon_distance,
    primitive_distance,
    refine_set,
    segment_distance,
    segment_distance_squared,
)
from app.selfcheck import UNIT_WINDOW, RoundShape, audit_decisions

UNIT_DISK = pixel_from_distance(disk_distance((ZERO, ZERO), ONE))


def _pixels(points: list[tuple[int, int]], n: int = 0) -> PixelSet:
    records = tuple(PixelRecord(ix, iy, Verdict(1, Diagnosis.CERTIFIED_IN)) for ix, iy in points)
    return PixelSet(n, 0, ComplexBox.around(ZERO, ZERO, Dyadic(8)), records)


def test_disk_pixel_verdicts():
    inside = UNIT_DISK.verdict((ZERO, ZERO), 2)
    assert inside == Verdict(1, Diagnosis.CERTIFIED_IN)
    far = UNIT_DISK.verdict((Dyadic(3), ZERO), 2)
    assert far == Verdict(0, Diagnosis.CERTIFIED_OUT)
    # a quarter away: kept, but not certainly within 2^-2
    assert UNIT_DISK.verdict((Dyadic(5, -2), ZERO), 2) == Verdict(1, Diagnosis.UNDETERMINED)


def test_verdict_must_agree_with_its_diagnosis():
    with pytest.raises(ValueError):
        Verdict(1, Diagnosis.CERTIFIED_OUT)
    with pytest.raises(ValueError):
        Verdict(0, Diagnosis.CERTIFIED_IN)


def test_grid_layout_runs_top_row_first():
    pixels = approximate_set(UNIT_DISK, 2, ComplexBox.around(ZERO, ZERO, Dyadic(2)))
    assert (pixels.columns, pixels.rows) == (17, 17)
    assert len(pixels.records) == 17 * 17
    assert (pixels.records[0].ix, pixels.records[0].iy) == (-8, 8)
    assert (pixels.records[-1].ix, pixels.records[-1].iy) == (8, -8)
    assert pixels.point(4, -2) == (ONE, Dyadic(-1, -1))
    assert not pixels.touches_boundary
    assert sum(pixels.counts().values()) == 17 * 17


def test_parallel_rows_match_serial_scan():
    window = ComplexBox.around(ZERO, ZERO, Dyadic(3, -1))
    serial = approximate_set(UNIT_DISK, 3, window)
    parallel = approximate_set(UNIT_DISK, 3, window, workers=4)
    assert [(r.ix, r.iy, r.verdict) for r in serial.records] == [
        (r.ix, r.iy, r.verdict) for r in parallel.records
    ]


def test_kept_pixels_hug_the_window_edge():
    pixels = approximate_set(UNIT_DISK, 2, ComplexBox.around(ZERO, ZERO, ONE))
    assert pixels.touches_boundary


@pytest.mark.parametrize("n", [2, 4, 5])
def test_circle_decisions_honour_the_pixel_contract(n):
    circle = pixel_from_distance(circle_distance((ZERO, ZERO), ONE))
    pixels = approximate_set(circle, n, UNIT_WINDOW)
    assert audit_decisions("circle", pixels, RoundShape(Fraction(1), filled=False)) == len(pixels.records)


def test_refinement_keeps_every_forced_pixel():
    full = approximate_set(UNIT_DISK, 4, UNIT_WINDOW)
    refined = refine_set(UNIT_DISK, 4, UNIT_WINDOW)
    forced = {
        (r.ix, r.iy) for r in full.records if r.verdict.diagnosis is Diagnosis.CERTIFIED_IN
    }
    assert forced <= set(refined.indices)
    assert audit_decisions("disk", refined, RoundShape(Fraction(1), filled=True)) > 0


def test_hausdorff_of_two_single_pixels():
    distance = hausdorff_pixels(_pixels([(0, 0)]), _pixels([(3, 4)]))
    assert distance.contains(Dyadic(5))
    assert distance.width() <= Dyadic(1, -32)


def test_hausdorff_across_resolutions():
    coarse = _pixels([(1, 0)], n=0)
    fine = _pixels([(2, 0), (0, 0)], n=1)
    # fine centers are 1 and 0; the farthest from coarse's single center 1 is 0
    assert hausdorff_pixels(coarse, fine).contains(ONE)


def test_hausdorff_needs_points():
    with pytest.raises(EmptySetError):
        hausdorff_pixels(_pixels([]), _pixels([(0, 0)]))


def test_distance_recovered_from_pixels():
    dist = distance_from_pixels(UNIT_DISK, 6, UNIT_WINDOW)
    outside = dist.eval((Dyadic(2), ZERO), 3)
    assert abs(outside - ONE) < Dyadic(1, -3)
    assert dist.eval((ZERO, ZERO), 3) < Dyadic(1, -3)
    with pytest.raises(PrecisionBudgetExceeded):
        dist.eval((ZERO, ZERO), 4)


def test_segment_distance_squared():
    a, b = (ZERO, ZERO), (Dyadic(2), ZERO)
    assert segment_distance_squared((ONE, ONE), a, b) == 1
    assert segment_distance_squared((Dyadic(3), ONE), a, b) == 2
    assert segment_distance_squared((Dyadic(-1), ZERO), a, a) == 1


def test_polygon_distance():
    square = [(ZERO, ZERO), (Dyadic(2), ZERO), (Dyadic(2), Dyadic(2)), (ZERO, Dyadic(2))]
    assert polygon_distance(square, filled=True).eval((ONE, ONE), 10) == ZERO
    assert polygon_distance(square).eval((ONE, ONE), 10) == ONE
    assert polygon_distance(square).eval((Dyadic(3), ONE), 10) == ONE
    with pytest.raises(ValueError):
        polygon_distance([(ZERO, ZERO)])


def test_primitive_dispatch():
    point = primitive_distance("point", center=(ONE, ZERO))
    assert point.eval((ONE, ONE), 6) == ONE
    disk = primitive_distance("disk", center=(ZERO, ZERO), radius=Dyadic(1, -1))
    assert disk.eval((Dyadic(3, -1), ZERO), 6) == ONE
    with pytest.raises(ValueError, match="unknown shape"):
        primitive_distance("torus")


HALF = Dyadic(1, -1)
TRIANGLE = [(Dyadic(-1), Dyadic(-1)), (ONE, Dyadic(-1)), (ZERO, ONE)]
SHAPES = {
    "disk": disk_distance((ZERO, ZERO), ONE),
    "circle": circle_distance((HALF, ZERO), ONE),
    "segment": segment_distance((Dyadic(-1), HALF), (ONE, Dyadic(-1, -1))),
    "triangle": polygon_distance(TRIANGLE, filled=True),
}


@pytest.mark.parametrize("name", sorted(SHAPES))
@pytest.mark.parametrize("n", [2, 3])
def test_consecutive_resolutions_stay_close(name, n):
    window = ComplexBox.around(ZERO, ZERO, Dyadic(2))
    decision = pixel_from_distance(SHAPES[name])
    coarse = approximate_set(decision, n, window)
    fine = approximate_set(decision, n + 1, window)
    assert hausdorff_pixels(coarse, fine).hi <= Dyadic(6, -n)


coordinates = st.builds(lambda m: Dyadic(m, -6), st.integers(-192, 192))


@settings(max_examples=60, deadline=None)
@given(
    st.sampled_from(sorted(SHAPES)),
    st.tuples(coordinates, coordinates),
    st.tuples(coordinates, coordinates),
    st.integers(2, 12),
)
def test_distance_oracles_are_one_lipschitz(name, x, y, n):
    dist = SHAPES[name]
    excess = abs(dist.eval(x, n) - dist.eval(y, n)).to_fraction() - Fraction(2, 2**n)
    if excess > 0:
        assert excess**2 <= segment_distance_squared(x, y, y)
