import itertools
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from solyanik.errors import CapExceeded, DimensionMismatch
from solyanik.lattice import (BasisElement, LatticeSet, Window, box_average, dump_family,
                              dump_lattice_set, enumerate_box_family, enumerate_centered_ball_family,
                              enumerate_one_sided_family, enumerate_uncentered_ball_family,
                              lift_measure, lifted_box_average, load_family, load_lattice_set,
                              make_family)

from oracles import box_traces, centered_traces


def traces(F):
    return {frozenset(e.trace) for e in F.elements}


def test_window_basics():
    W = Window((-1, 0), (1, 2))
    assert W.shape == (3, 3) and W.size == 9
    assert list(W.points())[:3] == [(-1, 0), (-1, 1), (-1, 2)]
    assert W.dilate(1) == Window((-2, -1), (2, 3))
    assert W.flat_index((0, 1)) == 4
    with pytest.raises(ValueError):
        Window((1,), (0,))


def test_box_family_counts_and_traces():
    assert len(enumerate_box_family(2, 3)) == 81
    F = enumerate_box_family(1, 2)
    assert traces(F) == {frozenset({(0,)}), frozenset({(-1,), (0,)}),
                         frozenset({(0,), (1,)}), frozenset({(-1,), (0,), (1,)})}
    assert traces(F) == set(box_traces(1, 2))
    assert traces(enumerate_box_family(2, 2)) == set(box_traces(2, 2))


def test_box_family_cap():
    with pytest.raises(CapExceeded):
        enumerate_box_family(3, 5, cap=1000)


def test_centered_family_matches_threshold_oracle():
    F = enumerate_centered_ball_family(2, 2)
    assert len(F) == 3
    assert traces(F) == set(centered_traces(2, 2))
    for n, r in [(1, 5), (2, 4), (3, 2)]:
        assert traces(enumerate_centered_ball_family(n, r)) == set(centered_traces(n, r))
    for e in enumerate_centered_ball_family(2, 4).elements:
        assert e.trace_set == {tuple(-x for x in j) for j in e.trace}


def test_uncentered_q1_in_one_dimension_is_the_box_family():
    assert traces(enumerate_uncentered_ball_family(1, 2, 1)) == traces(enumerate_box_family(1, 2))
    assert traces(enumerate_uncentered_ball_family(1, 4, 1)) == traces(enumerate_box_family(1, 4))


def test_uncentered_two_dimensional_contains_asymmetric_traces():
    F = enumerate_uncentered_ball_family(2, 2, 2)
    assert len(F) == 47
    assert frozenset({(0, 0), (1, 0)}) in traces(F)
    assert traces(enumerate_centered_ball_family(2, 2)) <= traces(F)
    assert enumerate_uncentered_ball_family(2, 2, 1).is_subfamily_of(F)


def test_one_sided_family():
    F = enumerate_one_sided_family(3)
    assert [e.trace for e in F.elements] == [((0,),), ((0,), (1,)), ((0,), (1,), (2,))]


def test_element_must_contain_origin():
    with pytest.raises(ValueError):
        BasisElement(((1,),), "box")


def test_family_serialization_round_trip():
    for F in [make_family("box", 2, 2), make_family("centered-ball", 2, 3),
              make_family("uncentered-ball", 2, 2, 2), make_family("one-sided", 1, 4)]:
        assert load_family(dump_family(F)) == F


@given(st.sets(st.tuples(st.integers(-4, 4), st.integers(-4, 4)), max_size=20))
def test_lattice_set_round_trip(pts):
    E = LatticeSet.from_points(pts, Window((-4, -4), (4, 4)))
    assert load_lattice_set(dump_lattice_set(E)) == E


def test_lattice_set_dimension_checks():
    with pytest.raises(DimensionMismatch):
        LatticeSet.from_points([(0,), (1, 2)])


def test_box_average_example():
    E = LatticeSet.from_points([(0,), (1,), (5,)])
    box = next(e for e in make_family("box", 1, 3).elements if e.corners == ((-1,), (1,)))
    assert box_average(E, (0,), box) == Fraction(2, 3)
    assert lifted_box_average(E, (0,), box) == Fraction(2, 3)


@settings(max_examples=200)
@given(st.integers(1, 3).flatmap(lambda n: st.tuples(
    st.just(n),
    st.sets(st.tuples(*[st.integers(-3, 3)] * n), max_size=25),
    st.tuples(*[st.integers(-2, 0)] * n),
    st.tuples(*[st.integers(0, 2)] * n),
    st.tuples(*[st.integers(-4, 4)] * n))))
def test_lift_identity(data):
    n, pts, lo, hi, m = data
    E = LatticeSet.from_points(pts, Window.cube(n, -3, 3))
    box = BasisElement(tuple(itertools.product(*[range(a, b + 1) for a, b in zip(lo, hi)])), "box")
    assert lifted_box_average(E, m, box) == box_average(E, m, box)
    assert lift_measure(E) == len(E)
