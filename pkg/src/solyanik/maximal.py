"""Discrete maximal fields of indicator functions, exact."""
from __future__ import annotations

import io
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import kernels
from .errors import DimensionMismatch
from .lattice import BasisFamily, LatticeSet, Window
from .plan import bases, box_plan, prefix_table, trace_plan


@dataclass(frozen=True)
class MaximalField:
    """Exact values ``num/den`` (lowest terms) on every point of ``window``."""

    window: Window
    num: np.ndarray
    den: np.ndarray
    family_kind: str
    truncation: int

    def __post_init__(self):
        num = np.asarray(self.num, dtype=np.int64).reshape(self.window.shape)
        den = np.asarray(self.den, dtype=np.int64).reshape(self.window.shape)
        g = np.gcd(num, den)
        g[g == 0] = 1
        object.__setattr__(self, "num", num // g)
        object.__setattr__(self, "den", den // g)

    def value(self, p) -> Fraction:
        idx = tuple(x - a for x, a in zip(p, self.window.lo))
        if not self.window.contains(p):
            raise KeyError(p)
        return Fraction(int(self.num[idx]), int(self.den[idx]))

    @property
    def values(self) -> dict:
        return {p: self.value(p) for p in self.window.points()}

    def __eq__(self, other):
        if not isinstance(other, MaximalField):
            return NotImplemented
        return (self.window == other.window and np.array_equal(self.num, other.num)
                and np.array_equal(self.den, other.den))

    __hash__ = None

    def to_csv(self) -> str:
        n = self.window.dim
        buf = io.StringIO()
        buf.write(",".join([f"x{i + 1}" for i in range(n)] + ["num", "den"]) + "\n")
        for p, nu, de in zip(self.window.points(), self.num.ravel(), self.den.ravel()):
            buf.write(",".join([str(x) for x in p] + [str(int(nu)), str(int(de))]) + "\n")
        return buf.getvalue()


def default_window(E: LatticeSet, F: BasisFamily) -> Window:
    """``E``'s window dilated by the truncation; the field vanishes outside it."""
    return E.window.dilate(F.truncation - 1)


def _check(E: LatticeSet, F: BasisFamily, W: Window):
    if not (E.dim == F.dim == W.dim):
        raise DimensionMismatch(f"set dim {E.dim}, family dim {F.dim}, window dim {W.dim}")


def maximal_field_naive(E: LatticeSet, F: BasisFamily, W: Window | None = None) -> MaximalField:
    """Reference oracle: direct counting with Fractions at every point."""
    W = default_window(E, F) if W is None else W
    _check(E, F, W)
    pts = E.points
    nums, dens = [], []
    for m in W.points():
        best = Fraction(0)
        for e in F.elements:
            hits = sum(1 for j in e.trace if tuple(a + b for a, b in zip(m, j)) in pts)
            best = max(best, Fraction(hits, e.size))
        nums.append(best.numerator)
        dens.append(best.denominator)
    return MaximalField(W, np.array(nums), np.array(dens), F.kind, F.truncation)


def maximal_field(E: LatticeSet, F: BasisFamily, W: Window | None = None) -> MaximalField:
    """Optimized field: summed-area tables for box families, nested
    incremental counts for everything else."""
    W = default_window(E, F) if W is None else W
    _check(E, F, W)
    grid = W.dilate(F.truncation - 1)
    ind = E.indicator(grid)
    if F.all_boxes:
        plan = box_plan(F)
        prefix = prefix_table(ind)
        b = bases(W, grid, prefix.shape)
        num, den = kernels.box_field(prefix.ravel(), b, plan.corner_deltas(prefix.shape), plan.signs, plan.sizes)
    else:
        plan = trace_plan(F)
        b = bases(W, grid)
        num, den = kernels.trace_field(ind.ravel(), b, plan.parent, plan.dstart,
                                       plan.deltas(grid.shape), plan.sizes)
    return MaximalField(W, num, den, F.kind, F.truncation)


def as_fraction(alpha) -> Fraction:
    if isinstance(alpha, float):
        raise TypeError("alpha must be rational (Fraction, int or 'a/b' string), not float")
    return Fraction(alpha)


def check_alpha(alpha) -> Fraction:
    alpha = as_fraction(alpha)
    if not 0 < alpha < 1:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    return alpha


def level_set(field: MaximalField, alpha) -> LatticeSet:
    """Points where the field is strictly greater than ``alpha``."""
    alpha = check_alpha(alpha)
    above = field.num * alpha.denominator > alpha.numerator * field.den
    lo = np.asarray(field.window.lo)
    pts = [tuple(int(x) for x in idx + lo) for idx in np.argwhere(above)]
    return LatticeSet.from_points(pts, field.window)
