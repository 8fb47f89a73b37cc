import math
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from solyanik.analysis import (FORMULA_RTOL, AnalysisConstants, ball_count_sandwich, centered_bound,
                               fit_exponent, lattice_count_open_ball, solyanik_c,
                               solyanik_c_threshold, theoretical_exponent, unit_ball_volume)


def test_unit_ball_volumes():
    assert unit_ball_volume(1) == pytest.approx(2, rel=FORMULA_RTOL)
    assert unit_ball_volume(2) == pytest.approx(math.pi, rel=FORMULA_RTOL)
    assert unit_ball_volume(3) == pytest.approx(4 * math.pi / 3, rel=FORMULA_RTOL)


def test_solyanik_c_closed_form():
    alpha, n = 0.999, 1
    s = 1 / (2 * (1 - alpha))
    assert solyanik_c(alpha, n) == pytest.approx(alpha * (s - 2) / (s + 1), rel=FORMULA_RTOL)


def test_solyanik_c_domain():
    for n in (1, 2, 3):
        a0 = solyanik_c_threshold(n)
        with pytest.raises(ValueError):
            solyanik_c(a0 - 1e-3, n)
        assert 0 < solyanik_c(a0 + (1 - a0) / 2, n) < 1
    with pytest.raises(ValueError):
        solyanik_c(1.0, 1)


def test_solyanik_c_increasing():
    for n in (1, 2, 3):
        a0 = solyanik_c_threshold(n)
        alphas = [1 - (1 - a0) * 0.5 ** k for k in range(1, 30)]
        vals = [solyanik_c(a, n) for a in alphas]
        assert all(b > a for a, b in zip(vals, vals[1:]))


def test_constants():
    c = AnalysisConstants.for_dimension(1)
    assert c.A_n == 2 and c.A_certified
    with pytest.raises(ValueError):
        AnalysisConstants.for_dimension(2)
    assert not AnalysisConstants.for_dimension(2, A_n=5).A_certified


def test_lattice_counts():
    assert lattice_count_open_ball([0], Fraction(5, 2), 1) == 5
    assert lattice_count_open_ball([0, 0], 1, 2) == 1
    assert lattice_count_open_ball([0, 0], Fraction(3, 2), 2) == 9
    assert lattice_count_open_ball([Fraction(1, 2)], 1, 1) == 2


def test_sandwich_example():
    res = ball_count_sandwich([0], 2.5, 1)
    assert res.count == 5 and res.passed
    assert res.lower == pytest.approx(3) and res.upper == pytest.approx(7)


@given(c=st.tuples(st.fractions(-20, 20, max_denominator=7), st.fractions(-20, 20, max_denominator=7)),
       r=st.floats(1.5, 9))
def test_sandwich_property(c, r):
    assert ball_count_sandwich(c, r, 2).passed


def test_centered_bound():
    assert centered_bound(Fraction(1, 2)) == 3
    assert centered_bound(Fraction(9, 10)) == Fraction(11, 9)
    assert centered_bound(0.5) == pytest.approx(3.0)


def test_exponent_table():
    for n in range(1, 5):
        assert theoretical_exponent("strong", "ergodic", n) == Fraction(1, n)
        assert theoretical_exponent("centered", "discrete", n) == 1
        assert theoretical_exponent("uncentered", "geometric", n) == Fraction(1, n + 1)
        assert theoretical_exponent("uncentered", "discrete", n) == Fraction(1, n * (n + 1))
    with pytest.raises(ValueError):
        theoretical_exponent("strong", "continuous", 1)


@pytest.mark.parametrize("gamma", [0.5, 1.0, 1 / 3])
def test_fit_recovers_planted_exponent(gamma):
    sweep = [(a, 1 + 3 * (1 / a - 1) ** gamma) for a in (0.5, 0.7, 0.9, 0.99)]
    fit = fit_exponent(sweep)
    assert abs(fit.slope - gamma) < 1e-12 and fit.residual < 1e-12
    assert fit.intercept == pytest.approx(math.log(3))


def test_fit_drops_unloggable_points():
    fit = fit_exponent([(Fraction(1, 2), Fraction(2)), (Fraction(3, 4), Fraction(3, 2)), (Fraction(9, 10), 1)])
    assert fit.dropped == 1
    with pytest.raises(ValueError):
        fit_exponent([(0.5, 1), (0.6, 1)])
