"""Windows, lattice sets and truncated basis families on Z^n.

Every basis element is stored through its *lattice trace*: the finite set of
integer offsets it contains. All traces contain the zero offset.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import CapExceeded, DimensionMismatch

ENUMERATION_CAP = 10**7

KINDS = ("box", "centered-ball", "uncentered-ball", "one-sided")

Point = tuple[int, ...]


@dataclass(frozen=True)
class Window:
    """Axis-parallel integer box ``lo[i] <= x[i] <= hi[i]`` (inclusive)."""

    lo: Point
    hi: Point

    def __post_init__(self):
        lo = tuple(int(v) for v in self.lo)
        hi = tuple(int(v) for v in self.hi)
        if len(lo) != len(hi) or not lo:
            raise ValueError(f"bad window bounds {lo} / {hi}")
        if any(a > b for a, b in zip(lo, hi)):
            raise ValueError(f"empty window: lo={lo} hi={hi}")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def cube(cls, n: int, lo: int, hi: int) -> "Window":
        return cls((lo,) * n, (hi,) * n)

    @classmethod
    def bounding(cls, points: Iterable[Sequence[int]]) -> "Window":
        pts = np.asarray(list(points), dtype=np.int64)
        if pts.size == 0:
            raise ValueError("cannot bound an empty point set")
        return cls(tuple(pts.min(axis=0)), tuple(pts.max(axis=0)))

    @property
    def dim(self) -> int:
        return len(self.lo)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(b - a + 1 for a, b in zip(self.lo, self.hi))

    @property
    def size(self) -> int:
        return int(np.prod(self.shape, dtype=object))

    def contains(self, p: Sequence[int]) -> bool:
        return len(p) == self.dim and all(a <= x <= b for a, x, b in zip(self.lo, p, self.hi))

    def points(self) -> Iterator[Point]:
        """Lattice points in lexicographic order."""
        return itertools.product(*(range(a, b + 1) for a, b in zip(self.lo, self.hi)))

    def dilate(self, k: int) -> "Window":
        return Window(tuple(a - k for a in self.lo), tuple(b + k for b in self.hi))

    def translate(self, v: Sequence[int]) -> "Window":
        return Window(tuple(a + x for a, x in zip(self.lo, v)), tuple(b + x for b, x in zip(self.hi, v)))

    def flat_index(self, p: Sequence[int]) -> int:
        idx = 0
        for a, x, s in zip(self.lo, p, self.shape):
            idx = idx * s + (x - a)
        return idx

    def __str__(self):
        return "[" + " x ".join(f"{a}..{b}" for a, b in zip(self.lo, self.hi)) + "]"


@dataclass(frozen=True)
class LatticeSet:
    """A finite subset of Z^n together with a window containing it."""

    points: frozenset
    window: Window

    def __post_init__(self):
        pts = frozenset(tuple(int(x) for x in p) for p in self.points)
        for p in pts:
            if not self.window.contains(p):
                raise ValueError(f"point {p} outside window {self.window}")
        object.__setattr__(self, "points", pts)

    @classmethod
    def from_points(cls, points: Iterable[Sequence[int]], window: Window | None = None,
                    dim: int | None = None) -> "LatticeSet":
        pts = [tuple(int(x) for x in p) for p in points]
        if len({len(p) for p in pts}) > 1:
            raise DimensionMismatch("points of different dimensions")
        if window is None:
            if pts:
                window = Window.bounding(pts)
            elif dim is not None:
                window = Window.cube(dim, 0, 0)
            else:
                raise ValueError("empty set needs a window or a dimension")
        return cls(frozenset(pts), window)

    @property
    def dim(self) -> int:
        return self.window.dim

    def __len__(self):
        return len(self.points)

    def __contains__(self, p):
        return tuple(p) in self.points

    def sorted_points(self) -> list[Point]:
        return sorted(self.points)

    def translate(self, v: Sequence[int]) -> "LatticeSet":
        v = tuple(v)
        return LatticeSet(frozenset(tuple(a + b for a, b in zip(p, v)) for p in self.points),
                          self.window.translate(v))

    def indicator(self, window: Window) -> np.ndarray:
        """0/1 array over ``window`` (points outside it are dropped)."""
        out = np.zeros(window.shape, dtype=np.int64)
        for p in self.points:
            if window.contains(p):
                out[tuple(x - a for x, a in zip(p, window.lo))] = 1
        return out


@dataclass(frozen=True)
class BasisElement:
    trace: tuple  # sorted tuple of integer offsets
    kind: str
    descriptor: tuple = field(default=(), compare=False)

    def __post_init__(self):
        trace = tuple(sorted({tuple(int(x) for x in j) for j in self.trace}))
        if not trace:
            raise ValueError("empty trace")
        n = len(trace[0])
        if any(len(j) != n for j in trace):
            raise DimensionMismatch("offsets of mixed dimension in one trace")
        if (0,) * n not in trace:
            raise ValueError(f"trace does not contain the origin: {trace}")
        if self.kind not in KINDS:
            raise ValueError(f"unknown basis kind {self.kind!r}")
        object.__setattr__(self, "trace", trace)

    @property
    def dim(self) -> int:
        return len(self.trace[0])

    @property
    def size(self) -> int:
        return len(self.trace)

    @cached_property
    def trace_set(self) -> frozenset:
        return frozenset(self.trace)

    @cached_property
    def corners(self) -> tuple[Point, Point]:
        """Lower/upper corners of the bounding box of the trace."""
        arr = np.asarray(self.trace)
        return tuple(int(v) for v in arr.min(axis=0)), tuple(int(v) for v in arr.max(axis=0))

    def is_box(self) -> bool:
        a, b = self.corners
        return self.size == int(np.prod([y - x + 1 for x, y in zip(a, b)]))


@dataclass(frozen=True)
class BasisFamily:
    """Deduplicated list of basis traces, all inside ``(-truncation, truncation)^n``."""

    dim: int
    kind: str
    truncation: int
    elements: tuple

    def __post_init__(self):
        els = tuple(self.elements)
        seen = set()
        r = self.truncation
        for e in els:
            if e.dim != self.dim:
                raise DimensionMismatch(f"element of dim {e.dim} in family of dim {self.dim}")
            if e.trace_set in seen:
                raise ValueError(f"duplicate trace {e.trace}")
            seen.add(e.trace_set)
            if any(abs(x) >= r for j in e.trace for x in j):
                raise ValueError(f"trace {e.trace} leaves (-{r}, {r})^{self.dim}")
        object.__setattr__(self, "elements", els)

    def __len__(self):
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    @cached_property
    def trace_sets(self) -> frozenset:
        return frozenset(e.trace_set for e in self.elements)

    def is_subfamily_of(self, other: "BasisFamily") -> bool:
        return self.dim == other.dim and self.trace_sets <= other.trace_sets

    @cached_property
    def all_boxes(self) -> bool:
        return all(e.is_box() for e in self.elements)

    def descriptor(self) -> str:
        return f"dim={self.dim} kind={self.kind} r={self.truncation} elements={len(self)}"


def _check_args(n: int, r: int):
    if int(n) != n or n < 1:
        raise ValueError(f"dimension must be >= 1, got {n}")
    if int(r) != r or r < 1:
        raise ValueError(f"truncation must be >= 1, got {r}")


def _check_cap(count: int, cap: int | None):
    cap = ENUMERATION_CAP if cap is None else cap
    if count > cap:
        raise CapExceeded(f"enumeration of {count} elements exceeds cap {cap}")


def _sorted_family(n, kind, r, elements) -> BasisFamily:
    elements = sorted(elements, key=lambda e: (e.size, e.trace))
    return BasisFamily(n, kind, r, tuple(elements))


def enumerate_box_family(n: int, r: int, cap: int | None = None) -> BasisFamily:
    """All integer boxes prod{a_i..b_i} with -r < a_i <= 0 <= b_i < r (r^(2n) of them)."""
    _check_args(n, r)
    _check_cap(r ** (2 * n), cap)
    sides = [(a, b) for a in range(-r + 1, 1) for b in range(0, r)]
    elements = []
    for combo in itertools.product(sides, repeat=n):
        lo = tuple(a for a, _ in combo)
        hi = tuple(b for _, b in combo)
        trace = tuple(itertools.product(*(range(a, b + 1) for a, b in combo)))
        elements.append(BasisElement(trace, "box", (("lo", lo), ("hi", hi))))
    return _sorted_family(n, "box", r, elements)


def _grid(n: int, r: int) -> np.ndarray:
    """Integer points of (-r, r)^n as an (m, n) array, lexicographic."""
    return np.array(list(itertools.product(range(-r + 1, r), repeat=n)), dtype=np.int64).reshape(-1, n)


def enumerate_centered_ball_family(n: int, r: int, cap: int | None = None) -> BasisFamily:
    """Traces {j : |j| < rho} for 0 < rho <= r, one per distinct trace."""
    _check_args(n, r)
    pts = _grid(n, r)
    norms = (pts * pts).sum(axis=1)
    keep = norms < r * r
    pts, norms = pts[keep], norms[keep]
    levels = np.unique(norms)
    _check_cap(len(levels), cap)
    elements = []
    for d2 in levels:
        trace = tuple(map(tuple, pts[norms <= d2].tolist()))
        elements.append(BasisElement(trace, "centered-ball", (("rho2", Fraction(int(d2))),)))
    return _sorted_family(n, "centered-ball", r, elements)


def enumerate_uncentered_ball_family(n: int, r: int, q: int = 1, cap: int | None = None) -> BasisFamily:
    """Ball traces with centers on (1/(2q))Z^n and critical radii.

    Half-integer centers are always included so that, in dimension one, every
    integer interval containing 0 is reachable already for ``q = 1``.
    Membership is the closed test ``|j - c|^2 <= |p - c|^2`` for a lattice point
    ``p``, i.e. an open ball of radius slightly above ``|p - c|``. The result is
    a subfamily of the full uncentered basis truncated at ``r``.
    """
    _check_args(n, r)
    if int(q) != q or q < 1:
        raise ValueError(f"center-grid denominator must be >= 1, got {q}")
    pts = _grid(n, r)
    q = 2 * q
    scaled = pts * q
    centers = _grid(n, q * r)  # numerators k with |k_i| < q r
    _check_cap(len(centers) * len(pts), cap)
    found: dict[frozenset, BasisElement] = {}
    for k in centers:
        d2 = ((scaled - k) ** 2).sum(axis=1)
        # nearest lattice point outside (-r, r)^n, in squared units of 1/q
        inner = np.minimum((k % q) ** 2, (q - k % q) ** 2)
        outside = min(
            int(inner.sum() - inner[i] + min((q * r - k[i]) ** 2, (q * r + k[i]) ** 2))
            for i in range(n)
        )
        origin = int((k * k).sum())
        for level in np.unique(d2):
            level = int(level)
            if level >= outside:
                break
            if level < origin:
                continue
            mask = d2 <= level
            key = frozenset(map(tuple, pts[mask].tolist()))
            if key in found:
                continue
            center = tuple(Fraction(int(x), q) for x in k)
            found[key] = BasisElement(tuple(key), "uncentered-ball",
                                      (("center", center), ("rho2", Fraction(level, q * q))))
            if len(found) > (ENUMERATION_CAP if cap is None else cap):
                _check_cap(len(found), cap)
    return _sorted_family(n, "uncentered-ball", r, found.values())


def enumerate_one_sided_family(r: int) -> BasisFamily:
    """Traces {0, ..., N-1} for 1 <= N <= r in dimension one."""
    _check_args(1, r)
    elements = [BasisElement(tuple((j,) for j in range(N)), "one-sided", (("N", N),))
                for N in range(1, r + 1)]
    return BasisFamily(1, "one-sided", r, tuple(elements))


def make_family(kind: str, n: int, r: int, q: int = 1, cap: int | None = None) -> BasisFamily:
    if kind == "box":
        return enumerate_box_family(n, r, cap)
    if kind == "centered-ball":
        return enumerate_centered_ball_family(n, r, cap)
    if kind == "uncentered-ball":
        return enumerate_uncentered_ball_family(n, r, q, cap)
    if kind == "one-sided":
        if n != 1:
            raise ValueError("one-sided family is one-dimensional")
        return enumerate_one_sided_family(r)
    raise ValueError(f"unknown basis kind {kind!r}")


def _check_dims(E: LatticeSet, m: Sequence[int], element: BasisElement):
    if not (E.dim == len(m) == element.dim):
        raise DimensionMismatch(f"dims differ: set {E.dim}, point {len(m)}, element {element.dim}")


def box_average(E: LatticeSet, m: Sequence[int], box: BasisElement) -> Fraction:
    """Fraction of the translated trace ``m + box`` lying in ``E``."""
    _check_dims(E, m, box)
    hits = sum(1 for j in box.trace if tuple(a + b for a, b in zip(m, j)) in E.points)
    return Fraction(hits, box.size)


def lifted_box_average(E: LatticeSet, m: Sequence[int], box: BasisElement) -> Fraction:
    """Continuous average of the floor-lift of ``E`` over the rectangle
    ``prod [m_i + a_i, m_i + b_i + 1)``.

    The measure of the lift inside the rectangle is accumulated cube by cube
    over the points of ``E``, independently of the trace enumeration.
    """
    _check_dims(E, m, box)
    if not box.is_box():
        raise ValueError("lifted average needs a box trace")
    a, b = box.corners
    left = [mi + ai for mi, ai in zip(m, a)]
    right = [mi + bi + 1 for mi, bi in zip(m, b)]
    volume = 1
    for x, y in zip(left, right):
        volume *= y - x
    covered = 0
    for p in E.points:
        piece = 1
        for x, y, pi in zip(left, right, p):
            piece *= max(0, min(y, pi + 1) - max(x, pi))
            if not piece:
                break
        covered += piece
    return Fraction(covered, volume)


def lift_measure(E: LatticeSet, window: Window | None = None) -> int:
    """Lebesgue measure of the floor-lift of ``E`` inside the real box
    ``prod [lo_i, hi_i + 1)`` of ``window`` (default: the set's own window)."""
    window = E.window if window is None else window
    total = 0
    for p in E.points:
        piece = 1
        for a, b, x in zip(window.lo, window.hi, p):
            piece *= max(0, min(b + 1, x + 1) - max(a, x))
        total += piece
    return total


# -- text serialization -----------------------------------------------------

def _fmt_point(p) -> str:
    return " ".join(str(int(x)) for x in p)


def _fmt_descriptor(desc) -> str:
    parts = []
    for key, val in desc:
        if isinstance(val, tuple):
            val = ",".join(str(v) for v in val)
        parts.append(f"{key}={val}")
    return " ".join(parts)


def _parse_descriptor(text: str):
    out = []
    for tok in text.split():
        key, val = tok.split("=", 1)
        if key in ("lo", "hi"):
            out.append((key, tuple(int(v) for v in val.split(","))))
        elif key == "center":
            out.append((key, tuple(Fraction(v) for v in val.split(","))))
        elif key == "N":
            out.append((key, int(val)))
        else:
            out.append((key, Fraction(val)))
    return tuple(out)


def dump_family(F: BasisFamily) -> str:
    lines = [f"dim={F.dim} kind={F.kind} r={F.truncation}"]
    for e in F.elements:
        line = ";".join(_fmt_point(j) for j in e.trace)
        if e.descriptor:
            line += " | " + _fmt_descriptor(e.descriptor)
        lines.append(line)
    return "\n".join(lines) + "\n"


def _parse_header(line: str) -> dict:
    return dict(tok.split("=", 1) for tok in line.split())


def load_family(text: str) -> BasisFamily:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    head = _parse_header(lines[0])
    n, kind, r = int(head["dim"]), head["kind"], int(head["r"])
    elements = []
    for ln in lines[1:]:
        body, _, desc = ln.partition("|")
        trace = tuple(tuple(int(x) for x in tok.split()) for tok in body.split(";"))
        elements.append(BasisElement(trace, kind, _parse_descriptor(desc)))
    return BasisFamily(n, kind, r, tuple(elements))


def dump_lattice_set(E: LatticeSet) -> str:
    w = E.window
    lines = [f"dim={E.dim} kind=set lo={','.join(map(str, w.lo))} hi={','.join(map(str, w.hi))}"]
    lines.extend(_fmt_point(p) for p in E.sorted_points())
    return "\n".join(lines) + "\n"


def load_lattice_set(text: str) -> LatticeSet:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    head = _parse_header(lines[0])
    if head.get("kind") != "set":
        raise ValueError("not a lattice-set document")
    n = int(head["dim"])
    window = Window(tuple(int(v) for v in head["lo"].split(",")),
                    tuple(int(v) for v in head["hi"].split(",")))
    pts = [tuple(int(x) for x in ln.split()) for ln in lines[1:]]
    if any(len(p) != n for p in pts):
        raise DimensionMismatch("point of wrong dimension")
    return LatticeSet.from_points(pts, window)
