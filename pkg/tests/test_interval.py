from __future__ import annotations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from app.dyadic import ONE, ZERO, Dyadic
from app.interval import ComplexBox, DyInterval, box_step, iv_arith, iv_sqr, mag_bounds

dyadics = st.builds(Dyadic, st.integers(-(2**20), 2**20), st.integers(-20, 4))


@st.composite
def intervals(draw):
    a, b = draw(dyadics), draw(dyadics)
    return DyInterval(min(a, b), max(a, b))


def _members(interval: DyInterval) -> list[Dyadic]:
    return [interval.lo, interval.midpoint(), interval.hi]


def test_empty_interval_is_rejected():
    with pytest.raises(ValueError):
        DyInterval(ONE, ZERO)


def test_geometry():
    unit = DyInterval(ZERO, ONE)
    assert unit.width() == ONE
    assert unit.midpoint() == Dyadic(1, -1)
    assert unit.contains(Dyadic(1, -3))
    assert not unit.contains(Dyadic(-1, -3))
    assert unit.intersection(DyInterval(Dyadic(2), Dyadic(3))) is None
    assert unit.intersection(DyInterval(Dyadic(1, -1), Dyadic(2))) == DyInterval(Dyadic(1, -1), ONE)
    assert unit.hull(DyInterval(Dyadic(2), Dyadic(3))) == DyInterval(ZERO, Dyadic(3))
    assert unit.split() == (DyInterval(ZERO, Dyadic(1, -1)), DyInterval(Dyadic(1, -1), ONE))
    assert unit.distance_to(Dyadic(3)) == Dyadic(2)
    assert unit.clamp(Dyadic(-5)) == ZERO


def test_magnitudes():
    straddle = DyInterval(Dyadic(-3), Dyadic(2))
    assert straddle.mag() == Dyadic(3)
    assert straddle.mig() == ZERO
    assert DyInterval(Dyadic(-3), Dyadic(-1)).mig() == ONE


@given(intervals(), intervals())
def test_exact_operations_contain_pointwise_results(a, b):
    for x in _members(a):
        for y in _members(b):
            assert (a + b).contains(x + y)
            assert (a - b).contains(x - y)
            assert (a * b).contains(x * y)
    for x in _members(a):
        assert a.sqr().contains(x * x)


@given(intervals(), intervals(), st.integers(0, 12), st.sampled_from(["add", "sub", "mul"]))
def test_outward_rounding_keeps_containment(a, b, p, op):
    rounded = iv_arith(a, b, op, p)
    exact = {"add": a + b, "sub": a - b, "mul": a * b}[op]
    assert exact.issubset(rounded)
    assert rounded.lo.is_zero() or rounded.lo.exponent >= -p
    assert iv_sqr(a, p).contains(a.lo * a.lo)


def test_square_of_straddling_interval_starts_at_zero():
    assert DyInterval(Dyadic(-1), Dyadic(2)).sqr() == DyInterval(ZERO, Dyadic(4))


def test_box_split_order():
    box = ComplexBox.around(ZERO, ZERO, ONE)
    lower_left, lower_right, upper_left, upper_right = box.split()
    assert lower_left == ComplexBox(DyInterval(Dyadic(-1), ZERO), DyInterval(Dyadic(-1), ZERO))
    assert lower_right.re == DyInterval(ZERO, ONE)
    assert upper_left.im == DyInterval(ZERO, ONE)
    assert upper_right == ComplexBox(DyInterval(ZERO, ONE), DyInterval(ZERO, ONE))


def test_box_distance_and_magnitude():
    box = ComplexBox(DyInterval(ONE, Dyadic(2)), DyInterval(ONE, Dyadic(2)))
    assert box.distance_squared_to(ZERO, ZERO) == Dyadic(2)
    assert box.distance_squared_to(Dyadic(3, -1), ONE) == ZERO
    assert box.mag_squared_bounds() == (Dyadic(2), Dyadic(8))
    lo, hi = mag_bounds(box)
    assert lo * lo <= Dyadic(2) <= hi * hi


def test_box_step_contains_the_exact_image():
    z = ComplexBox.point(Dyadic(1, -1), Dyadic(1, -1))
    image = box_step(z, ComplexBox.point(ZERO, ZERO), 10)
    # (1/2 + i/2)^2 = i/2
    assert image.contains(ZERO, Dyadic(1, -1))
    wide = ComplexBox.around(Dyadic(1, -1), ZERO, Dyadic(1, -4))
    c = ComplexBox.point(Dyadic(-1), ZERO)
    stepped = box_step(wide, c, 6)
    for x in (Dyadic(7, -4), Dyadic(1, -1), Dyadic(9, -4)):
        assert stepped.contains(x * x - ONE, ZERO)


small = st.builds(Dyadic, st.integers(-(2**12), 2**12), st.integers(-12, -8))


@st.composite
def boxes_with_member(draw):
    """A box and a point drawn anywhere inside it."""
    x0, y0 = draw(small), draw(small)
    w, h = (Dyadic(draw(st.integers(0, 2**8)), -10) for _ in range(2))
    box = ComplexBox(DyInterval(x0, x0 + w), DyInterval(y0, y0 + h))
    u, v = draw(st.integers(0, 2**8)), draw(st.integers(0, 2**8))
    point = (x0 + (w * u).shift(-8), y0 + (h * v).shift(-8))
    return box, point


@given(boxes_with_member(), boxes_with_member(), st.integers(0, 30))
def test_box_step_contains_images_of_interior_points(zb, cb, p):
    (z, (x, y)), (c, (cx, cy)) = zb, cb
    image = box_step(z, c, p)
    assert image.contains(x * x - y * y + cx, (x * y).shift(1) + cy)


@given(boxes_with_member(), st.integers(0, 30))
def test_mag_bounds_enclose_interior_points(zb, p):
    z, (x, y) = zb
    lo, hi = mag_bounds(z, p)
    assert lo * lo <= x * x + y * y <= hi * hi
