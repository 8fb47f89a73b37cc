"""Flattening basis families into the integer arrays the kernels consume."""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .lattice import BasisFamily, Window


def strides(shape) -> np.ndarray:
    out = np.ones(len(shape), dtype=np.int64)
    for i in range(len(shape) - 2, -1, -1):
        out[i] = out[i + 1] * shape[i + 1]
    return out


@dataclass(frozen=True)
class TracePlan:
    """Forest encoding of a family: ``parent``, ``dstart``, ``offsets``, ``sizes``."""

    parent: np.ndarray
    dstart: np.ndarray
    offsets: np.ndarray  # (D, n) added offsets, concatenated
    sizes: np.ndarray

    def deltas(self, shape) -> np.ndarray:
        return self.offsets @ strides(shape) if len(self.offsets) else np.zeros(0, dtype=np.int64)


def _box_parent(corners, index):
    lo, hi = corners
    for i in range(len(lo) - 1, -1, -1):
        if hi[i] > 0:
            cand = (lo, hi[:i] + (hi[i] - 1,) + hi[i + 1:])
            return index.get(cand, -1)
        if lo[i] < 0:
            cand = (lo[:i] + (lo[i] + 1,) + lo[i + 1:], hi)
            return index.get(cand, -1)
    return -1


def _cached(name):
    def wrap(build):
        def get(family: BasisFamily):
            plan = family.__dict__.get(name)
            if plan is None:
                plan = build(family)
                family.__dict__[name] = plan
            return plan
        get.__doc__ = build.__doc__
        get.__name__ = build.__name__
        return get
    return wrap


@_cached("_trace_plan")
def trace_plan(family: BasisFamily) -> TracePlan:
    els = family.elements
    parents = []
    if family.all_boxes:
        index = {e.corners: t for t, e in enumerate(els)}
        for e in els:
            p = _box_parent(e.corners, index)
            parents.append(p if p >= 0 and els[p].size < e.size else -1)
    else:
        for t, e in enumerate(els):
            best = -1
            # nested chains (centered balls, one-sided) hit on the first probe
            for s in range(t - 1, -1, -1):
                if els[s].size < e.size and els[s].trace_set < e.trace_set:
                    if best < 0 or els[s].size > els[best].size:
                        best = s
                    if s == t - 1 or t > 2000:
                        break
            parents.append(best)
    offsets, dstart = [], [0]
    for e, p in zip(els, parents):
        added = e.trace_set - els[p].trace_set if p >= 0 else e.trace_set
        offsets.extend(sorted(added))
        dstart.append(len(offsets))
    return TracePlan(
        parent=np.asarray(parents, dtype=np.int64),
        dstart=np.asarray(dstart, dtype=np.int64),
        offsets=np.asarray(offsets, dtype=np.int64).reshape(-1, family.dim),
        sizes=np.asarray([e.size for e in els], dtype=np.int64),
    )


@dataclass(frozen=True)
class BoxPlan:
    """Inclusion-exclusion corners of each box relative to a prefix-table base."""

    lows: np.ndarray   # (T, n)
    highs: np.ndarray  # (T, n), exclusive (b + 1)
    signs: np.ndarray  # (2^n,)
    choice: np.ndarray  # (2^n, n) 0 -> low corner, 1 -> high corner
    sizes: np.ndarray

    def corner_deltas(self, prefix_shape) -> np.ndarray:
        st = strides(prefix_shape)
        pick = np.where(self.choice[None, :, :] == 1, self.highs[:, None, :], self.lows[:, None, :])
        return (pick * st[None, None, :]).sum(axis=2)


@_cached("_box_plan")
def box_plan(family: BasisFamily) -> BoxPlan:
    if not family.all_boxes:
        raise ValueError("box plan needs a family of boxes")
    n = family.dim
    lows = np.asarray([e.corners[0] for e in family.elements], dtype=np.int64).reshape(-1, n)
    highs = np.asarray([e.corners[1] for e in family.elements], dtype=np.int64).reshape(-1, n) + 1
    choice = np.asarray(list(itertools.product((0, 1), repeat=n)), dtype=np.int64)
    signs = np.asarray([(-1) ** (n - int(c.sum())) for c in choice], dtype=np.int64)
    sizes = np.asarray([e.size for e in family.elements], dtype=np.int64)
    return BoxPlan(lows, highs, signs, choice, sizes)


def prefix_table(ind: np.ndarray) -> np.ndarray:
    """Summed-area table with a zero leading slab on every axis."""
    out = ind.astype(np.int64)
    for ax in range(ind.ndim):
        out = np.cumsum(out, axis=ax)
    return np.pad(out, [(1, 0)] * ind.ndim)


def bases(points_window: Window, grid: Window, shape=None) -> np.ndarray:
    """Flat index in an array over ``grid`` (optionally with a different
    ``shape``, e.g. a prefix table) of every point of ``points_window``."""
    shape = grid.shape if shape is None else shape
    rel = [np.arange(a - g, b - g + 1) for a, b, g in zip(points_window.lo, points_window.hi, grid.lo)]
    mesh = np.meshgrid(*rel, indexing="ij")
    st = strides(shape)
    return sum(m.ravel() * s for m, s in zip(mesh, st)).astype(np.int64)
