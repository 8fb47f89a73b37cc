"""Certified lower bounds for discrete Tauberian constants.

The constant at ``alpha`` is the supremum over finite nonempty ``E`` of
``#{M chi_E > alpha} / #E``. Restricting ``E`` to a window gives a lower
bound together with the witness set achieving it.
"""
from __future__ import annotations

import io
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import kernels
from .errors import CapExceeded, DimensionMismatch
from .lattice import BasisFamily, LatticeSet, Window
from .maximal import check_alpha, level_set, maximal_field
from .plan import bases, box_plan, prefix_table, strides, trace_plan

EXHAUSTIVE_CAP = 20

EXACT = "exact-over-window"
SEARCH = "search-lower-bound"


@dataclass(frozen=True)
class TauberianEstimate:
    alpha: Fraction
    value: Fraction
    witness: object  # LatticeSet for lattice constants, frozenset of atoms for ergodic ones
    mode: str
    family: str
    seed: int | None = None


def tauberian_ratio(E: LatticeSet, F: BasisFamily, alpha) -> Fraction:
    alpha = check_alpha(alpha)
    if not len(E):
        raise ValueError("Tauberian ratio of an empty set is undefined")
    return Fraction(len(level_set(maximal_field(E, F), alpha)), len(E))


def _alphas(grid) -> tuple[np.ndarray, np.ndarray, list[Fraction]]:
    fr = [check_alpha(a) for a in grid]
    return (np.array([a.numerator for a in fr], dtype=np.int64),
            np.array([a.denominator for a in fr], dtype=np.int64), fr)


def _cell_masks(W: Window, F: BasisFamily):
    """Per evaluation point, the bitmasks of ``(p + trace) & W`` (nonzero only)."""
    if W.dim != F.dim:
        raise DimensionMismatch(f"window dim {W.dim} vs family dim {F.dim}")
    evalw = W.dilate(F.truncation - 1)
    grid = evalw.dilate(F.truncation - 1)
    cell = np.full(grid.shape, -1, dtype=np.int64)
    inner = tuple(slice(a - g, b - g + 1) for a, b, g in zip(W.lo, W.hi, grid.lo))
    cell[inner] = np.arange(W.size).reshape(W.shape)
    flat = cell.ravel()
    b = bases(evalw, grid)
    tm, tsize, tstart = [], [], [0]
    gshape = grid.shape
    deltas = [np.asarray(e.trace, dtype=np.int64) @ strides(gshape) for e in F.elements]
    bits = np.where(flat >= 0, np.left_shift(1, np.maximum(flat, 0)), 0)
    for base in b:
        for e, d in zip(F.elements, deltas):
            m = int(np.bitwise_or.reduce(bits[base + d]))
            if m:
                tm.append(m)
                tsize.append(e.size)
        tstart.append(len(tm))
    return (np.array(tm, dtype=np.int64), np.array(tstart, dtype=np.int64),
            np.array(tsize, dtype=np.int64))


def _mask_to_set(mask: int, W: Window) -> LatticeSet:
    pts = [p for i, p in enumerate(W.points()) if (mask >> i) & 1]
    return LatticeSet.from_points(pts, W)


def exhaustive_sweep(W: Window, F: BasisFamily, grid: Sequence, cap: int = EXHAUSTIVE_CAP) -> list[TauberianEstimate]:
    """Exact maximum of the ratio over all nonempty ``E`` inside ``W``, for each alpha.

    Ties go to the lexicographically smallest witness (sorted point list).
    """
    if W.size > cap:
        raise CapExceeded(f"window has {W.size} cells; exhaustive cap is {cap}")
    anum, aden, fr = _alphas(grid)
    tm, tstart, tsize = _cell_masks(W, F)
    masks = np.arange(1, 1 << W.size, dtype=np.int64)
    level, card, best = kernels.exhaustive_lattice(tm, tstart, tsize, masks, anum, aden)
    return [TauberianEstimate(a, Fraction(int(lv), int(cd)), _mask_to_set(int(mk), W), EXACT, F.descriptor())
            for a, lv, cd, mk in zip(fr, level, card, best)]


def exhaustive_constant(W: Window, F: BasisFamily, alpha, cap: int = EXHAUSTIVE_CAP) -> TauberianEstimate:
    return exhaustive_sweep(W, F, [alpha], cap)[0]


class _RatioEvaluator:
    """Level-set count of a subset of ``W`` given as a boolean cell array."""

    def __init__(self, W: Window, F: BasisFamily, alpha: Fraction):
        self.W, self.F, self.alpha = W, F, alpha
        self.evalw = W.dilate(F.truncation - 1)
        self.grid = self.evalw.dilate(F.truncation - 1)
        self.inner = tuple(slice(a - g, b - g + 1) for a, b, g in zip(W.lo, W.hi, self.grid.lo))
        self.ind = np.zeros(self.grid.shape, dtype=np.int64)
        if F.all_boxes:
            self.plan = box_plan(F)
            pshape = tuple(s + 1 for s in self.grid.shape)
            self.bases = bases(self.evalw, self.grid, pshape)
            self.cd = self.plan.corner_deltas(pshape)
        else:
            self.plan = trace_plan(F)
            self.bases = bases(self.evalw, self.grid)
            self.deltas = self.plan.deltas(self.grid.shape)

    def level_count(self, cells: np.ndarray) -> int:
        self.ind[self.inner] = cells.reshape(self.W.shape)
        if self.F.all_boxes:
            num, den = kernels.box_field(prefix_table(self.ind).ravel(), self.bases, self.cd,
                                         self.plan.signs, self.plan.sizes)
        else:
            p = self.plan
            num, den = kernels.trace_field(self.ind.ravel(), self.bases, p.parent, p.dstart,
                                           self.deltas, p.sizes)
        a = self.alpha
        return int(np.count_nonzero(num * a.denominator > a.numerator * den))


def _lex_key(cells: np.ndarray) -> tuple:
    return tuple(np.flatnonzero(cells).tolist())


def search_constant(W: Window, F: BasisFamily, alpha, budget: int, seed: int,
                    max_stale: int | None = None) -> TauberianEstimate:
    """Randomized-restart hill climbing over subsets of ``W`` by single-cell flips.

    A flip is kept when the ratio does not decrease (plateau moves allowed);
    a restart happens after ``max_stale`` consecutive non-improving proposals.
    The random stream does not depend on ``budget``, so for a fixed seed the
    best value is nondecreasing in ``budget``.
    """
    alpha = check_alpha(alpha)
    if budget < 1:
        raise ValueError("budget must be >= 1")
    if W.dim != F.dim:
        raise DimensionMismatch(f"window dim {W.dim} vs family dim {F.dim}")
    ev = _RatioEvaluator(W, F, alpha)
    rng = np.random.default_rng(seed)
    ncell = W.size
    max_stale = 4 * ncell if max_stale is None else max_stale
    best_val, best_cells = None, None
    evals = 0

    def consider(val, cells):
        nonlocal best_val, best_cells
        if best_val is None or val > best_val or (val == best_val and _lex_key(cells) < _lex_key(best_cells)):
            best_val, best_cells = val, cells.copy()

    while evals < budget:
        size = int(rng.integers(1, ncell + 1))
        cells = np.zeros(ncell, dtype=np.int64)
        cells[rng.choice(ncell, size=size, replace=False)] = 1
        cur = Fraction(ev.level_count(cells), size)
        evals += 1
        consider(cur, cells)
        stale = 0
        while evals < budget and stale < max_stale:
            i = int(rng.integers(ncell))
            cells[i] ^= 1
            card = int(cells.sum())
            if card == 0:
                cells[i] ^= 1
                stale += 1
                continue
            val = Fraction(ev.level_count(cells), card)
            evals += 1
            if val >= cur:
                stale = 0 if val > cur else stale + 1
                cur = val
                consider(val, cells)
            else:
                cells[i] ^= 1
                stale += 1
    pts = [p for p, c in zip(W.points(), best_cells) if c]
    return TauberianEstimate(alpha, best_val, LatticeSet.from_points(pts, W), SEARCH, F.descriptor(), seed)


def alpha_sweep(W: Window, F: BasisFamily, grid: Sequence, mode: str = EXACT, budget: int = 1000,
                seed: int | None = None, cap: int = EXHAUSTIVE_CAP) -> list[TauberianEstimate]:
    """One estimate per alpha; raw values, no monotone correction."""
    fr = [check_alpha(a) for a in grid]
    if not fr or any(b <= a for a, b in zip(fr, fr[1:])):
        raise ValueError("alpha grid must be nonempty and strictly increasing")
    if mode == EXACT:
        return exhaustive_sweep(W, F, fr, cap)
    if mode == SEARCH:
        if seed is None:
            raise ValueError("search mode needs a seed")
        return [search_constant(W, F, a, budget, seed) for a in fr]
    raise ValueError(f"unknown mode {mode!r}")


SWEEP_COLUMNS = ("alpha_num", "alpha_den", "value_num", "value_den", "mode", "witness_size", "seed")


def sweep_to_csv(estimates: Sequence[TauberianEstimate]) -> str:
    buf = io.StringIO()
    buf.write(",".join(SWEEP_COLUMNS) + "\n")
    for e in estimates:
        seed = "" if e.seed is None else str(e.seed)
        buf.write(f"{e.alpha.numerator},{e.alpha.denominator},{e.value.numerator},"
                  f"{e.value.denominator},{e.mode},{len(e.witness)},{seed}\n")
    return buf.getvalue()
