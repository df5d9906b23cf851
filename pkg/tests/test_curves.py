import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from maginterp.curves import (BoundCurve, evaluate_curve, invert_curve, invert_curve_tagged,
                              monotonicity_violations, second_differences)
from maginterp.errors import CurveError, InputError, RangeError


def _curve(**kw):
    x = np.linspace(0.0, 4.0, 9)
    return BoundCurve("alpha", x, np.sqrt(x + 1.0), asymptotics={"left": (-1.0, 0.0), "right": (1.0, 0.5)}, **kw)


def test_validation():
    with pytest.raises(InputError):
        BoundCurve("delta", [0, 1], [0, 1])
    with pytest.raises(InputError):
        BoundCurve("alpha", [1, 0], [0, 1])
    with pytest.raises(CurveError):
        BoundCurve("alpha", [0, 1, 2], [0, 2, 1])
    BoundCurve("alpha", [0, 1, 2], [0, 2, 1], monotone=False)
    with pytest.raises(CurveError):
        BoundCurve("alpha", [0, 1], [0, np.nan])


def test_interpolation_and_ranges():
    c = _curve()
    assert c(2.0) == pytest.approx(np.sqrt(3.0), rel=1e-15)
    assert c(2.25) == pytest.approx(np.sqrt(3.25), rel=1e-3)
    with pytest.raises(RangeError):
        c(5.0)
    v, ext = evaluate_curve(c, 9.0, extend=True)
    assert ext and v == 3.0
    v, ext = evaluate_curve(c, -0.5, extend=True)
    # chord from (-1, 0) to the first sample
    assert ext and v == pytest.approx(0.5, rel=1e-15)
    with pytest.raises(RangeError):
        evaluate_curve(c, -2.0, extend=True)


def test_inversion_and_tags():
    c = _curve()
    assert invert_curve(c, 2.0) == pytest.approx(3.0, abs=1e-3)
    x, ext = invert_curve_tagged(c, 10.0, extend=True)
    assert ext and x == pytest.approx(100.0)
    x, ext = invert_curve_tagged(c, 0.0, extend=True)
    assert ext and x == -1.0
    with pytest.raises(RangeError):
        invert_curve(c, 10.0)
    with pytest.raises(CurveError):
        invert_curve(BoundCurve("alpha", [0, 1, 2], [0, 2, 1], monotone=False), 0.5)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(0.01, 10.0), min_size=3, max_size=12), st.floats(0.0, 1.0))
def test_round_trip_on_random_monotone_samples(steps, u):
    x = np.cumsum(steps)
    y = np.cumsum(np.sqrt(steps))
    c = BoundCurve("beta", x, y)
    target = y[0] + u * (y[-1] - y[0])
    assert c(invert_curve(c, target)) == pytest.approx(target, rel=1e-12, abs=1e-12)


def test_helpers():
    assert monotonicity_violations([0, 1, 1, 2, 1]) == [1, 3]
    x = np.array([0.0, 0.5, 2.0, 3.0])
    assert np.allclose(second_differences(x, x ** 2), 2.0)
