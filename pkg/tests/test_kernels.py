"""The numba and pure-numpy kernels must agree bit for bit, witnesses included."""
from fractions import Fraction

import numpy as np
import pytest

from solyanik import kernels
from solyanik.ergodic import (cycle_type_system, ergodic_tauberian_sweep, product_cyclic_system,
                              transference_identity_batch)
from solyanik.lattice import LatticeSet, Window, make_family
from solyanik.maximal import maximal_field
from solyanik.tauberian import exhaustive_sweep

pytestmark = pytest.mark.skipif(not kernels.NUMBA_KERNELS, reason="numba not available")

GRID = [Fraction(1, 4), Fraction(1, 2), Fraction(2, 3), Fraction(9, 10)]


def both(monkeypatch, compute):
    out = []
    for table in (kernels.NUMBA_KERNELS, kernels.NUMPY_KERNELS):
        with monkeypatch.context() as m:
            for name, fn in table.items():
                m.setattr(kernels, name, fn)
            out.append(compute())
    return out


def test_popcount_and_lex_order():
    for x in [0, 1, 0b1011, (1 << 62) + 5, (1 << 40) - 1]:
        assert kernels.popcount64(np.int64(x)) == bin(x).count("1")
    masks = list(range(1, 64))
    for a in masks[:20]:
        for b in masks:
            assert bool(kernels.lex_less(np.int64(a), np.int64(b))) == (kernels._lex_key(a) < kernels._lex_key(b))


@pytest.mark.parametrize("kind,n,r", [("box", 2, 3), ("centered-ball", 2, 3), ("uncentered-ball", 2, 2, ),
                                      ("one-sided", 1, 5), ("box", 3, 2)])
def test_fields_agree(monkeypatch, kind, n, r):
    rng = np.random.default_rng(r)
    W = Window.cube(n, -3, 3)
    E = LatticeSet.from_points([p for p in W.points() if rng.random() < 0.3], W)
    F = make_family(kind, n, r, 2 if kind == "uncentered-ball" else 1)
    a, b = both(monkeypatch, lambda: maximal_field(E, F))
    assert a == b


@pytest.mark.parametrize("W,kind,r", [(Window((0,), (11,)), "box", 4), (Window((0, 0), (2, 3)), "centered-ball", 2),
                                      (Window((0, 0), (3, 3)), "box", 2)])
def test_exhaustive_lattice_agrees(monkeypatch, W, kind, r):
    F = make_family(kind, W.dim, r)
    a, b = both(monkeypatch, lambda: exhaustive_sweep(W, F, GRID))
    assert [(e.value, e.witness) for e in a] == [(e.value, e.witness) for e in b]


def test_exhaustive_ergodic_agrees(monkeypatch):
    s = cycle_type_system((5, 3, 2), (1, 4, 2))
    F = make_family("centered-ball", 1, 6)
    a, b = both(monkeypatch, lambda: ergodic_tauberian_sweep(s, F, GRID))
    assert [(e.value, e.witness) for e in a] == [(e.value, e.witness) for e in b]


@pytest.mark.parametrize("kind", ["box", "centered-ball"])
def test_transference_agrees(monkeypatch, kind):
    s = product_cyclic_system(2, 3)
    F = make_family(kind, 2, 2)
    a, b = both(monkeypatch, lambda: transference_identity_batch(s, F, 2))
    assert a.passed and b.passed and a.details == b.details
