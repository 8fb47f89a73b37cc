"""Hot inner loops, in numba and pure-numpy flavours.

Everything here works on integers only: a ratio ``c/s`` is carried as the
pair ``(c, s)`` and compared by cross-multiplication, so the maximal values
and Tauberian ratios stay exact. The public functions dispatch on
:data:`solyanik._accel.HAVE_NUMBA`; both paths stay reachable for testing
and benchmarking through ``NUMPY_KERNELS`` and ``NUMBA_KERNELS``.

Trace plans
-----------
A family of traces is encoded as a forest: trace ``t`` has a ``parent``
(a strict subset appearing earlier, or -1) and the flat-index ``deltas``
of the offsets it adds, stored in ``deltas[dstart[t]:dstart[t+1]]``. The
count over trace ``t`` is then ``count[parent] + sum(x[base + delta])``.
"""
from __future__ import annotations

import numpy as np

from ._accel import HAVE_NUMBA, njit


# -- helpers shared by both paths --------------------------------------------

@njit
def popcount64(x):
    x = x - ((x >> 1) & 0x5555555555555555)
    x = (x & 0x3333333333333333) + ((x >> 2) & 0x3333333333333333)
    x = (x + (x >> 4)) & 0x0F0F0F0F0F0F0F0F
    return (x * 0x0101010101010101 >> 56) & 0xFF


@njit
def lex_less(a, b):
    """True if the sorted bit-index list of mask ``a`` is lexicographically
    smaller than that of ``b`` (a proper prefix counts as smaller)."""
    if a == b:
        return False
    d = a ^ b
    low = d & -d
    above = ~((low << 1) - 1)
    if a & low:
        # b's next index after the common prefix is > low, or b has ended
        return (b & above) != 0
    return (a & above) == 0


def _lex_key(mask: int) -> tuple:
    return tuple(i for i in range(mask.bit_length()) if (mask >> i) & 1)


# -- single-set lattice fields -------------------------------------------------

@njit
def _box_field_nb(prefix, bases, corner_deltas, signs, sizes):
    npts = bases.shape[0]
    nbox = sizes.shape[0]
    ncorner = signs.shape[0]
    num = np.zeros(npts, dtype=np.int64)
    den = np.ones(npts, dtype=np.int64)
    for p in range(npts):
        base = bases[p]
        bn = 0
        bd = 1
        for t in range(nbox):
            c = 0
            for k in range(ncorner):
                c += signs[k] * prefix[base + corner_deltas[t, k]]
            s = sizes[t]
            if c * bd > bn * s:
                bn = c
                bd = s
        num[p] = bn
        den[p] = bd
    return num, den


def _box_field_np(prefix, bases, corner_deltas, signs, sizes):
    num = np.zeros(len(bases), dtype=np.int64)
    den = np.ones(len(bases), dtype=np.int64)
    for t in range(len(sizes)):
        c = (signs[None, :] * prefix[bases[:, None] + corner_deltas[t][None, :]]).sum(axis=1)
        better = c * den > num * sizes[t]
        num[better] = c[better]
        den[better] = sizes[t]
    return num, den


@njit
def _trace_field_nb(ind, bases, parent, dstart, deltas, sizes):
    npts = bases.shape[0]
    ntr = sizes.shape[0]
    num = np.zeros(npts, dtype=np.int64)
    den = np.ones(npts, dtype=np.int64)
    counts = np.zeros(ntr, dtype=np.int64)
    for p in range(npts):
        base = bases[p]
        bn = 0
        bd = 1
        for t in range(ntr):
            c = 0
            if parent[t] >= 0:
                c = counts[parent[t]]
            for k in range(dstart[t], dstart[t + 1]):
                c += ind[base + deltas[k]]
            counts[t] = c
            s = sizes[t]
            if c * bd > bn * s:
                bn = c
                bd = s
        num[p] = bn
        den[p] = bd
    return num, den


def _trace_field_np(ind, bases, parent, dstart, deltas, sizes):
    num = np.zeros(len(bases), dtype=np.int64)
    den = np.ones(len(bases), dtype=np.int64)
    counts = np.zeros((len(sizes), len(bases)), dtype=np.int64)
    for t in range(len(sizes)):
        c = np.zeros(len(bases), dtype=np.int64) if parent[t] < 0 else counts[parent[t]].copy()
        d = deltas[dstart[t]:dstart[t + 1]]
        if len(d):
            c += ind[bases[:, None] + d[None, :]].sum(axis=1)
        counts[t] = c
        better = c * den > num * sizes[t]
        num[better] = c[better]
        den[better] = sizes[t]
    return num, den


# -- exhaustive search over subsets of a window --------------------------------

@njit
def _exhaustive_lattice_nb(tm, tstart, tsize, masks, anum, aden):
    """For every mask, level counts per alpha; keep the best ratio per alpha.

    ``tm[tstart[p]:tstart[p+1]]`` are the (nonzero) cell masks of the traces
    translated to evaluation point ``p``, with sizes in ``tsize``.
    """
    npts = tstart.shape[0] - 1
    na = anum.shape[0]
    best_level = np.zeros(na, dtype=np.int64)
    best_card = np.ones(na, dtype=np.int64)
    best_mask = np.full(na, -1, dtype=np.int64)
    level = np.zeros(na, dtype=np.int64)
    for mi in range(masks.shape[0]):
        mask = masks[mi]
        card = popcount64(mask)
        if card == 0:
            continue
        for a in range(na):
            level[a] = 0
        for p in range(npts):
            bn = 0
            bd = 1
            for k in range(tstart[p], tstart[p + 1]):
                c = popcount64(mask & tm[k])
                s = tsize[k]
                if c * bd > bn * s:
                    bn = c
                    bd = s
                    if bn == bd:
                        break
            if bn == 0:
                continue
            for a in range(na):
                if bn * aden[a] > anum[a] * bd:
                    level[a] += 1
        for a in range(na):
            lhs = level[a] * best_card[a]
            rhs = best_level[a] * card
            if best_mask[a] < 0 or lhs > rhs or (lhs == rhs and lex_less(mask, best_mask[a])):
                best_level[a] = level[a]
                best_card[a] = card
                best_mask[a] = mask
    return best_level, best_card, best_mask


def _pick_best(levels, cards, masks, state, a):
    """Merge a chunk's candidates for alpha index ``a`` into ``state``."""
    bl, bc, bm = state
    top = int(np.argmax(levels / cards))
    while True:
        greater = np.flatnonzero(levels * cards[top] > levels[top] * cards)
        if not len(greater):
            break
        top = int(greater[0])
    cand = np.flatnonzero(levels * cards[top] == levels[top] * cards)
    i_best = min(cand, key=lambda i: _lex_key(int(masks[i])))
    lvl, crd, msk = int(levels[i_best]), int(cards[i_best]), int(masks[i_best])
    if bm[a] < 0:
        better = True
    else:
        lhs, rhs = lvl * int(bc[a]), int(bl[a]) * crd
        better = lhs > rhs or (lhs == rhs and _lex_key(msk) < _lex_key(int(bm[a])))
    if better:
        bl[a], bc[a], bm[a] = lvl, crd, msk


def _exhaustive_lattice_np(tm, tstart, tsize, masks, anum, aden, chunk=512):
    na = len(anum)
    state = (np.zeros(na, dtype=np.int64), np.ones(na, dtype=np.int64), np.full(na, -1, dtype=np.int64))
    starts = tstart[:-1][tstart[:-1] < tstart[1:]]
    masks = masks[masks != 0]
    for lo in range(0, len(masks), chunk):
        mk = masks[lo:lo + chunk]
        cards = np.bitwise_count(mk).astype(np.int64)
        counts = np.bitwise_count(mk[:, None] & tm[None, :]).astype(np.int64)
        for a in range(na):
            hit = counts * aden[a] > anum[a] * tsize[None, :]
            if len(starts):
                levels = np.logical_or.reduceat(hit, starts, axis=1).sum(axis=1).astype(np.int64)
            else:
                levels = np.zeros(len(mk), dtype=np.int64)
            _pick_best(levels, cards, mk, state, a)
    return state


# -- exhaustive search over subsets of a finite system --------------------------

@njit
def _ergodic_values_nb(mask, table, parent, dstart, sizes, counts, num, den):
    k = table.shape[0]
    ntr = sizes.shape[0]
    for w in range(k):
        bn = 0
        bd = 1
        for t in range(ntr):
            c = 0
            if parent[t] >= 0:
                c = counts[parent[t]]
            for d in range(dstart[t], dstart[t + 1]):
                c += (mask >> table[w, d]) & 1
            counts[t] = c
            s = sizes[t]
            if c * bd > bn * s:
                bn = c
                bd = s
        num[w] = bn
        den[w] = bd


@njit
def _exhaustive_ergodic_nb(table, parent, dstart, sizes, weights, masks, anum, aden):
    k = table.shape[0]
    na = anum.shape[0]
    best_level = np.zeros(na, dtype=np.int64)
    best_meas = np.ones(na, dtype=np.int64)
    best_mask = np.full(na, -1, dtype=np.int64)
    counts = np.zeros(sizes.shape[0], dtype=np.int64)
    num = np.zeros(k, dtype=np.int64)
    den = np.ones(k, dtype=np.int64)
    level = np.zeros(na, dtype=np.int64)
    for mi in range(masks.shape[0]):
        mask = masks[mi]
        if mask == 0:
            continue
        meas = 0
        for w in range(k):
            if (mask >> w) & 1:
                meas += weights[w]
        _ergodic_values_nb(mask, table, parent, dstart, sizes, counts, num, den)
        for a in range(na):
            level[a] = 0
        for w in range(k):
            for a in range(na):
                if num[w] * aden[a] > anum[a] * den[w]:
                    level[a] += weights[w]
        for a in range(na):
            lhs = level[a] * best_meas[a]
            rhs = best_level[a] * meas
            if best_mask[a] < 0 or lhs > rhs or (lhs == rhs and lex_less(mask, best_mask[a])):
                best_level[a] = level[a]
                best_meas[a] = meas
                best_mask[a] = mask
    return best_level, best_meas, best_mask


def _ergodic_values_np(bits, table, parent, dstart, sizes):
    """Maximal values for a batch of sets; ``bits`` is (batch, k) 0/1."""
    B, k = bits.shape
    num = np.zeros((B, k), dtype=np.int64)
    den = np.ones((B, k), dtype=np.int64)
    counts = np.zeros((len(sizes), B, k), dtype=np.int64)
    for t in range(len(sizes)):
        c = np.zeros((B, k), dtype=np.int64) if parent[t] < 0 else counts[parent[t]].copy()
        for d in range(dstart[t], dstart[t + 1]):
            c += bits[:, table[:, d]]
        counts[t] = c
        better = c * den > num * sizes[t]
        num[better] = c[better]
        den[better] = sizes[t]
    return num, den


def _mask_bits(masks, k):
    return ((masks[:, None] >> np.arange(k, dtype=np.int64)[None, :]) & 1).astype(np.int64)


def _exhaustive_ergodic_np(table, parent, dstart, sizes, weights, masks, anum, aden, chunk=2048):
    k = table.shape[0]
    na = len(anum)
    state = (np.zeros(na, dtype=np.int64), np.ones(na, dtype=np.int64), np.full(na, -1, dtype=np.int64))
    masks = masks[masks != 0]
    for lo in range(0, len(masks), chunk):
        mk = masks[lo:lo + chunk]
        bits = _mask_bits(mk, k)
        meas = bits @ weights
        num, den = _ergodic_values_np(bits, table, parent, dstart, sizes)
        for a in range(na):
            above = num * aden[a] > anum[a] * den
            levels = (above * weights[None, :]).sum(axis=1)
            _pick_best(levels, meas, mk, state, a)
    return state


# -- transference identity over many sets ---------------------------------------

@njit
def _prefix_fill(prefix, ind, pshape, pstrides, ishape):
    """Summed-area table of the n-dim array ``ind`` into ``prefix`` (shape ishape+1)."""
    n = pshape.shape[0]
    prefix[:] = 0
    total = ind.shape[0]
    for i in range(total):
        rem = i
        pidx = 0
        for ax in range(n - 1, -1, -1):
            coord = rem % ishape[ax]
            rem //= ishape[ax]
            pidx += (coord + 1) * pstrides[ax]
        prefix[pidx] = ind[i]
    for ax in range(n):
        st = pstrides[ax]
        for i in range(prefix.shape[0]):
            if (i // st) % pshape[ax] > 0:
                prefix[i] += prefix[i - st]


@njit
def _transference_nb(masks, left_table, parent, dstart, sizes,
                     sec_table, m_bases, m_atoms, use_box,
                     corner_deltas, signs, pshape, pstrides, ishape,
                     sec_parent, sec_dstart, sec_deltas):
    """Check left == right for every mask, base atom and shift.

    Returns ``(checked, fail_mask, fail_base, fail_m, ln, ld, rn, rd)`` with
    ``fail_mask = -1`` when everything agrees.
    """
    k = left_table.shape[0]
    ntr = sizes.shape[0]
    ncell = sec_table.shape[1]
    nm = m_bases.shape[0]
    counts = np.zeros(ntr, dtype=np.int64)
    lnum = np.zeros(k, dtype=np.int64)
    lden = np.ones(k, dtype=np.int64)
    ind = np.zeros(ncell, dtype=np.int64)
    prefix = np.zeros(1, dtype=np.int64)
    if use_box:
        size = 1
        for ax in range(pshape.shape[0]):
            size *= pshape[ax]
        prefix = np.zeros(size, dtype=np.int64)
    ncorner = signs.shape[0]
    checked = 0
    for mi in range(masks.shape[0]):
        mask = masks[mi]
        _ergodic_values_nb(mask, left_table, parent, dstart, sizes, counts, lnum, lden)
        for wb in range(k):
            for c in range(ncell):
                ind[c] = (mask >> sec_table[wb, c]) & 1
            if use_box:
                _prefix_fill(prefix, ind, pshape, pstrides, ishape)
            for mm in range(nm):
                base = m_bases[mm]
                bn = 0
                bd = 1
                for t in range(ntr):
                    c = 0
                    if use_box:
                        for q in range(ncorner):
                            c += signs[q] * prefix[base + corner_deltas[t, q]]
                    else:
                        if sec_parent[t] >= 0:
                            c = counts[sec_parent[t]]
                        for d in range(sec_dstart[t], sec_dstart[t + 1]):
                            c += ind[base + sec_deltas[d]]
                        counts[t] = c
                    s = sizes[t]
                    if c * bd > bn * s:
                        bn = c
                        bd = s
                w = m_atoms[wb, mm]
                checked += 1
                if bn * lden[w] != lnum[w] * bd:
                    return checked, mask, wb, mm, lnum[w], lden[w], bn, bd
    return checked, -1, -1, -1, 0, 1, 0, 1


def _transference_np(masks, left_table, parent, dstart, sizes,
                     sec_table, m_bases, m_atoms, use_box,
                     corner_deltas, signs, pshape, pstrides, ishape,
                     sec_parent, sec_dstart, sec_deltas, chunk=1024):
    k = left_table.shape[0]
    checked = 0
    n = len(ishape)
    for lo in range(0, len(masks), chunk):
        mk = masks[lo:lo + chunk]
        bits = _mask_bits(mk, k)
        lnum, lden = _ergodic_values_np(bits, left_table, parent, dstart, sizes)
        for wb in range(k):
            sec = bits[:, sec_table[wb]]  # (B, ncell)
            if use_box:
                grid = sec.reshape((len(mk),) + tuple(int(s) for s in ishape))
                for ax in range(n):
                    grid = np.cumsum(grid, axis=ax + 1)
                grid = np.pad(grid, [(0, 0)] + [(1, 0)] * n)
                flat = grid.reshape(len(mk), -1)
                rnum = np.zeros((len(mk), len(m_bases)), dtype=np.int64)
                rden = np.ones_like(rnum)
                for t in range(len(sizes)):
                    c = np.zeros_like(rnum)
                    for q in range(len(signs)):
                        c += signs[q] * flat[:, m_bases + corner_deltas[t, q]]
                    better = c * rden > rnum * sizes[t]
                    rnum[better] = c[better]
                    rden[better] = sizes[t]
            else:
                rnum, rden = _trace_field_batch_np(sec, m_bases, sec_parent, sec_dstart, sec_deltas, sizes)
            ln = lnum[:, m_atoms[wb]]
            ld = lden[:, m_atoms[wb]]
            bad = rnum * ld != ln * rden
            checked += bad.size
            if bad.any():
                b, mm = map(int, np.argwhere(bad)[0])
                return (checked, int(mk[b]), wb, mm, int(ln[b, mm]), int(ld[b, mm]),
                        int(rnum[b, mm]), int(rden[b, mm]))
    return checked, -1, -1, -1, 0, 1, 0, 1


def _trace_field_batch_np(ind, bases, parent, dstart, deltas, sizes):
    B = ind.shape[0]
    num = np.zeros((B, len(bases)), dtype=np.int64)
    den = np.ones_like(num)
    counts = np.zeros((len(sizes), B, len(bases)), dtype=np.int64)
    for t in range(len(sizes)):
        c = np.zeros_like(num) if parent[t] < 0 else counts[parent[t]].copy()
        for d in deltas[dstart[t]:dstart[t + 1]]:
            c += ind[:, bases + d]
        counts[t] = c
        better = c * den > num * sizes[t]
        num[better] = c[better]
        den[better] = sizes[t]
    return num, den


# -- dispatch --------------------------------------------------------------------

if HAVE_NUMBA:
    box_field = _box_field_nb
    trace_field = _trace_field_nb
    exhaustive_lattice = _exhaustive_lattice_nb
    exhaustive_ergodic = _exhaustive_ergodic_nb
    transference_batch = _transference_nb
else:
    box_field = _box_field_np
    trace_field = _trace_field_np
    exhaustive_lattice = _exhaustive_lattice_np
    exhaustive_ergodic = _exhaustive_ergodic_np
    transference_batch = _transference_np

NUMPY_KERNELS = {
    "box_field": _box_field_np,
    "trace_field": _trace_field_np,
    "exhaustive_lattice": _exhaustive_lattice_np,
    "exhaustive_ergodic": _exhaustive_ergodic_np,
    "transference_batch": _transference_np,
}

NUMBA_KERNELS = {
    "box_field": _box_field_nb,
    "trace_field": _trace_field_nb,
    "exhaustive_lattice": _exhaustive_lattice_nb,
    "exhaustive_ergodic": _exhaustive_ergodic_nb,
    "transference_batch": _transference_nb,
} if HAVE_NUMBA else {}
