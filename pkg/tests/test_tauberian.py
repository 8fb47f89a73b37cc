from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from solyanik.errors import CapExceeded
from solyanik.lattice import LatticeSet, Window, make_family
from solyanik.tauberian import (EXACT, SEARCH, alpha_sweep, exhaustive_constant, exhaustive_sweep,
                                search_constant, sweep_to_csv, tauberian_ratio)

import oracles

HALF, THIRD = Fraction(1, 2), Fraction(1, 3)

# Frozen from the brute-force oracle in oracles.exhaustive (strict level sets).
ONE_DIM_BOX_R8 = {
    Fraction(1, 2): (Fraction(5, 2), [(-3,), (-2,), (-1,), (0,)]),
    Fraction(2, 3): (Fraction(9, 5), [(-3,), (-2,), (-1,), (0,), (1,)]),
    Fraction(3, 4): (Fraction(3, 2), [(-3,), (-2,), (-1,), (0,)]),
}


def test_single_point_ratios():
    E = LatticeSet.from_points([(0,)])
    F = make_family("box", 1, 8)
    assert tauberian_ratio(E, F, Fraction(3, 10)) == 5
    assert tauberian_ratio(E, F, HALF) == 1


def test_one_dimensional_sweep_matches_oracle():
    ests = exhaustive_sweep(Window((-3,), (3,)), make_family("box", 1, 8), sorted(ONE_DIM_BOX_R8))
    for est in ests:
        value, witness = ONE_DIM_BOX_R8[est.alpha]
        assert est.value == value
        assert est.witness.sorted_points() == witness
        assert est.mode == EXACT


def test_small_window_matches_oracle():
    est = exhaustive_constant(Window((-2,), (2,)), make_family("box", 1, 5), HALF)
    assert (est.value, est.witness.sorted_points()) == (Fraction(7, 3), [(-2,), (-1,), (0,)])


@pytest.mark.parametrize("kind,traces,alpha", [
    ("box", oracles.box_traces(2, 2), HALF),
    ("centered-ball", oracles.centered_traces(2, 2), THIRD),
])
def test_two_dimensional_window_matches_oracle(kind, traces, alpha):
    value, witness = oracles.exhaustive((0, 0), (1, 1), list(traces), alpha, 2)
    est = exhaustive_constant(Window((0, 0), (1, 1)), make_family(kind, 2, 2), alpha)
    assert (est.value, est.witness.sorted_points()) == (value, witness)


def test_cap():
    with pytest.raises(CapExceeded):
        exhaustive_constant(Window((0,), (20,)), make_family("box", 1, 2), HALF)


def test_witness_reproduces_value():
    F = make_family("centered-ball", 2, 2)
    for est in exhaustive_sweep(Window((0, 0), (2, 2)), F, [THIRD, HALF, Fraction(3, 4)]):
        assert tauberian_ratio(est.witness, F, est.alpha) == est.value


def test_search_is_deterministic_and_bounded():
    W, F = Window((-3,), (3,)), make_family("box", 1, 8)
    a = search_constant(W, F, HALF, budget=400, seed=5)
    b = search_constant(W, F, HALF, budget=400, seed=5)
    assert (a.value, a.witness) == (b.value, b.witness)
    assert a.mode == SEARCH and a.seed == 5
    assert 1 <= a.value <= exhaustive_constant(W, F, HALF).value
    assert tauberian_ratio(a.witness, F, HALF) == a.value


def test_search_monotone_in_budget():
    W, F = Window((0, 0), (3, 3)), make_family("box", 2, 2)
    vals = [search_constant(W, F, HALF, budget=b, seed=2).value for b in (10, 50, 200)]
    assert vals == sorted(vals)


def test_search_finds_optimum_on_small_window():
    W, F = Window((-2,), (2,)), make_family("box", 1, 5)
    assert search_constant(W, F, HALF, budget=2000, seed=0).value == Fraction(7, 3)


def test_sweep_validation_and_csv():
    W, F = Window((0,), (2,)), make_family("box", 1, 3)
    with pytest.raises(ValueError):
        alpha_sweep(W, F, [HALF, THIRD])
    with pytest.raises(ValueError):
        alpha_sweep(W, F, [HALF], mode=SEARCH)
    with pytest.raises(TypeError):
        alpha_sweep(W, F, [0.5])
    csv = sweep_to_csv(alpha_sweep(W, F, [THIRD, HALF]))
    lines = csv.splitlines()
    assert lines[0] == "alpha_num,alpha_den,value_num,value_den,mode,witness_size,seed"
    assert len(lines) == 3 and lines[1].startswith("1,3,")


@settings(max_examples=25, deadline=None)
@given(lo=st.integers(-5, 5), length=st.integers(1, 8), shift=st.integers(-9, 9),
       kind=st.sampled_from(["box", "centered-ball", "one-sided"]))
def test_translation_invariance(lo, length, shift, kind):
    W = Window((lo,), (lo + length - 1,))
    F = make_family(kind, 1, 3)
    a = exhaustive_sweep(W, F, [THIRD, HALF])
    b = exhaustive_sweep(W.translate((shift,)), F, [THIRD, HALF])
    for x, y in zip(a, b):
        assert x.value == y.value
        assert x.witness.translate((shift,)).points == y.witness.points


@settings(max_examples=15, deadline=None)
@given(length=st.integers(1, 10))
def test_antitone_and_family_monotone(length):
    W = Window((0,), (length - 1,))
    grid = [Fraction(k, 10) for k in range(1, 10)]
    small = exhaustive_sweep(W, make_family("centered-ball", 1, 4), grid)
    big = exhaustive_sweep(W, make_family("box", 1, 4), grid)
    assert all(e.value >= 1 for e in big)
    assert [e.value for e in big] == sorted((e.value for e in big), reverse=True)
    assert all(s.value <= b.value for s, b in zip(small, big))
