"""Brute-force reference computations, written straight from the definitions.

Nothing here imports the package's computational code: traces are built by
hand, averages are counted point by point, suprema are taken over every
candidate set. Slow and obviously correct is the point.
"""
from __future__ import annotations

import itertools
from fractions import Fraction


def box_traces(n: int, r: int):
    """All integer boxes containing the origin inside (-r, r)^n, as offset sets."""
    sides = [(a, b) for a in range(-r + 1, 1) for b in range(0, r)]
    for corners in itertools.product(sides, repeat=n):
        yield frozenset(itertools.product(*[range(a, b + 1) for a, b in corners]))


def centered_traces(n: int, r: int):
    pts = list(itertools.product(range(-r + 1, r), repeat=n))
    norms = sorted({sum(x * x for x in p) for p in pts if sum(x * x for x in p) < r * r})
    for rho2 in norms:
        yield frozenset(p for p in pts if sum(x * x for x in p) <= rho2)


def one_sided_traces(r: int):
    for N in range(1, r + 1):
        yield frozenset((j,) for j in range(N))


def field(E, traces, m) -> Fraction:
    E = set(E)
    return max(Fraction(sum(1 for j in t if tuple(a + b for a, b in zip(m, j)) in E), len(t))
               for t in traces)


def level_ratio(E, traces, alpha, r: int) -> Fraction:
    """#{field > alpha} / #E, counting over every point within reach of E."""
    traces = list(traces)
    n = len(next(iter(E)))
    region = set()
    for p in E:
        for d in itertools.product(range(-r + 1, r), repeat=n):
            region.add(tuple(a - b for a, b in zip(p, d)))
    return Fraction(sum(1 for m in region if field(E, traces, m) > alpha), len(E))


def window_cells(lo, hi):
    return list(itertools.product(*[range(a, b + 1) for a, b in zip(lo, hi)]))


def exhaustive(lo, hi, traces, alpha, r: int):
    """Max ratio over nonempty subsets of the window; ties -> smallest sorted point list."""
    cells = window_cells(lo, hi)
    traces = list(traces)
    best = None
    for k in range(1, len(cells) + 1):
        for E in itertools.combinations(cells, k):
            v = level_ratio(E, traces, alpha, r)
            key = (-v, sorted(E))
            if best is None or key < best:
                best = key
    return -best[0], best[1]


def cyclic_field(N: int, E, intervals, w: int) -> Fraction:
    """Ergodic average field on Z_N for 1D offset intervals."""
    return max(Fraction(sum(1 for j in t if (w + j[0]) % N in E), len(t)) for t in intervals)


def ergodic_exhaustive(weights, perm, intervals, alpha):
    """max over nonempty E of mu{field > alpha} / mu(E) for a single permutation."""
    k = len(perm)
    intervals = list(intervals)

    def act(j, x):
        for _ in range(abs(j)):
            x = perm[x] if j > 0 else perm.index(x)
        return x

    best = None
    for mask in range(1, 1 << k):
        E = {i for i in range(k) if mask >> i & 1}
        lvl = sum((weights[w] for w in range(k)
                   if max(Fraction(sum(1 for j in t if act(j[0], w) in E), len(t)) for t in intervals) > alpha),
                  Fraction(0))
        v = lvl / sum(weights[i] for i in E)
        best = v if best is None else max(best, v)
    return best
