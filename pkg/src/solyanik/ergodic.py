"""Finite weighted probability spaces with commuting measure-preserving
permutations, their maximal operators, and the transference identities."""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from . import kernels
from .errors import CapExceeded, DimensionMismatch, InvalidSystem
from .lattice import BasisFamily, LatticeSet, Window
from .maximal import check_alpha, level_set, maximal_field
from .plan import bases, box_plan, strides, trace_plan
from .tauberian import EXACT, TauberianEstimate

EXHAUSTIVE_CAP = 20


@dataclass(frozen=True)
class FiniteSystem:
    """Atoms ``0..size-1`` with weights ``mu`` and permutations ``U_1..U_n``.

    Construction validates everything: bijectivity, weight preservation and
    pairwise commutation.
    """

    weights: tuple
    maps: tuple
    inverses: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        w = tuple(Fraction(x) for x in self.weights)
        k = len(w)
        if k == 0:
            raise InvalidSystem("a system needs at least one atom")
        if any(x <= 0 for x in w):
            raise InvalidSystem("weights must be positive")
        if sum(w) != 1:
            raise InvalidSystem(f"weights sum to {sum(w)}, not 1")
        maps = tuple(tuple(int(v) for v in u) for u in self.maps)
        if not maps:
            raise InvalidSystem("a system needs at least one map")
        inverses = []
        for i, u in enumerate(maps):
            if sorted(u) != list(range(k)):
                raise InvalidSystem(f"map U_{i + 1} is not a bijection of 0..{k - 1}")
            for x in range(k):
                if w[u[x]] != w[x]:
                    raise InvalidSystem(f"map U_{i + 1} moves atom {x} (weight {w[x]}) "
                                        f"to atom {u[x]} (weight {w[u[x]]})")
            inv = [0] * k
            for x, y in enumerate(u):
                inv[y] = x
            inverses.append(tuple(inv))
        for i, j in itertools.combinations(range(len(maps)), 2):
            ui, uj = maps[i], maps[j]
            for x in range(k):
                if ui[uj[x]] != uj[ui[x]]:
                    raise InvalidSystem(f"maps U_{i + 1} and U_{j + 1} do not commute at atom {x}: "
                                        f"U_{i + 1}U_{j + 1}({x}) = {ui[uj[x]]}, "
                                        f"U_{j + 1}U_{i + 1}({x}) = {uj[ui[x]]}")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "maps", maps)
        object.__setattr__(self, "inverses", tuple(inverses))

    @property
    def size(self) -> int:
        return len(self.weights)

    @property
    def dim(self) -> int:
        return len(self.maps)

    def power(self, axis: int, k: int, x: int) -> int:
        """``U_axis^k x``; negative powers use the inverse permutation."""
        u = self.maps[axis] if k >= 0 else self.inverses[axis]
        for _ in range(abs(k)):
            x = u[x]
        return x

    def act(self, t: Sequence[int], x: int) -> int:
        """``U_1^{t_1} ... U_n^{t_n} x``, applying ``U_n`` first."""
        for axis in range(self.dim - 1, -1, -1):
            x = self.power(axis, t[axis], x)
        return x

    def measure(self, atoms: Iterable[int]) -> Fraction:
        return sum((self.weights[a] for a in set(atoms)), Fraction(0))

    @cached_property
    def common_denominator(self) -> int:
        d = 1
        for w in self.weights:
            d = d * w.denominator // np.gcd(d, w.denominator)
        return int(d)

    @cached_property
    def integer_weights(self) -> np.ndarray:
        d = self.common_denominator
        return np.array([int(w * d) for w in self.weights], dtype=np.int64)


def make_finite_system(weights, maps) -> FiniteSystem:
    return FiniteSystem(tuple(weights), tuple(maps))


def product_cyclic_system(*N: int) -> FiniteSystem:
    """Uniform ``Z_{N_1} x ... x Z_{N_n}`` with unit shifts on each coordinate."""
    if not N or any(int(x) != x or x < 1 for x in N):
        raise ValueError(f"cycle lengths must be >= 1, got {N}")
    atoms = list(itertools.product(*(range(x) for x in N)))
    index = {a: i for i, a in enumerate(atoms)}
    maps = []
    for axis, Ni in enumerate(N):
        maps.append(tuple(index[a[:axis] + ((a[axis] + 1) % Ni,) + a[axis + 1:]] for a in atoms))
    k = len(atoms)
    return FiniteSystem(tuple(Fraction(1, k) for _ in atoms), tuple(maps))


def cycle_type_system(parts: Sequence[int], weights: Sequence | None = None) -> FiniteSystem:
    """One permutation made of disjoint cycles of the given lengths.

    ``weights`` gives one (unnormalized, positive) weight per cycle; atoms in a
    cycle share its weight. Default: uniform over atoms.
    """
    perm, w_atoms, start = [], [], 0
    weights = [1] * len(parts) if weights is None else list(weights)
    for L, wc in zip(parts, weights):
        perm.extend(start + (i + 1) % L for i in range(L))
        w_atoms.extend([Fraction(wc)] * L)
        start += L
    total = sum(w_atoms)
    return FiniteSystem(tuple(x / total for x in w_atoms), (tuple(perm),))


def random_commuting_system(rng: np.random.Generator, blocks: Sequence[Sequence[int]],
                            random_weights: bool = True) -> FiniteSystem:
    """Disjoint union of product-cyclic blocks, randomly relabeled.

    Each block ``(N_1, ..., N_n)`` is an orbit of the generated group; weights
    are constant on blocks (random small integers when ``random_weights``).
    The relabeling hides the product structure without breaking commutation.
    """
    n = len(blocks[0])
    if any(len(b) != n for b in blocks):
        raise ValueError("all blocks need the same number of axes")
    parts = [product_cyclic_system(*b) for b in blocks]
    k = sum(p.size for p in parts)
    perm = rng.permutation(k)
    maps = [[0] * k for _ in range(n)]
    weights = [Fraction(0)] * k
    offset = 0
    for p in parts:
        bw = Fraction(int(rng.integers(1, 6))) if random_weights else Fraction(1)
        for x in range(p.size):
            weights[int(perm[offset + x])] = bw
            for axis in range(n):
                maps[axis][int(perm[offset + x])] = int(perm[offset + p.maps[axis][x]])
        offset += p.size
    total = sum(weights)
    return FiniteSystem(tuple(x / total for x in weights), tuple(tuple(m) for m in maps))


# -- maximal operators --------------------------------------------------------------

def _check_dim(sys: FiniteSystem, F: BasisFamily):
    if F.dim != sys.dim:
        raise DimensionMismatch(f"family dim {F.dim} vs system dim {sys.dim}")


def _atom_set(sys: FiniteSystem, E) -> frozenset:
    E = frozenset(int(a) for a in E)
    if any(not 0 <= a < sys.size for a in E):
        raise ValueError(f"atoms outside 0..{sys.size - 1}")
    return E


def ergodic_maximal_field(sys: FiniteSystem, E, F: BasisFamily) -> dict:
    """``max_J (1/#J) sum_{j in J} chi_E(U^j w)`` for every atom ``w``."""
    _check_dim(sys, F)
    E = _atom_set(sys, E)
    out = {}
    for w in range(sys.size):
        best = Fraction(0)
        for e in F.elements:
            hits = sum(1 for j in e.trace if sys.act(j, w) in E)
            best = max(best, Fraction(hits, e.size))
        out[w] = best
    return out


def one_sided_maximal(sys: FiniteSystem, E, Nmax: int | None = None) -> dict:
    """``max_{1<=N<=Nmax} (1/N) #{0<=j<N : U_1^j w in E}``; ``Nmax`` defaults to ``|Omega|``."""
    Nmax = sys.size if Nmax is None else Nmax
    if Nmax < 1:
        raise ValueError("Nmax must be >= 1")
    E = _atom_set(sys, E)
    u = sys.maps[0]
    out = {}
    for w in range(sys.size):
        best, hits, x = Fraction(0), 0, w
        for N in range(1, Nmax + 1):
            hits += x in E
            x = u[x]
            best = max(best, Fraction(hits, N))
        out[w] = best
    return out


def ergodic_level_measure(sys: FiniteSystem, values: dict, alpha) -> Fraction:
    alpha = check_alpha(alpha)
    return sum((sys.weights[w] for w, v in values.items() if v > alpha), Fraction(0))


def orbit_table(sys: FiniteSystem, offsets: np.ndarray, reverse: bool = False) -> np.ndarray:
    """``table[w, d] = U^{offsets[d]} w``.

    ``reverse`` applies ``U_1`` first instead of ``U_n``; for a commuting
    system both orders agree, which the transference checks rely on to keep
    their two sides computed along different routes.
    """
    k = sys.size
    table = np.tile(np.arange(k, dtype=np.int64)[:, None], (1, len(offsets)))
    axes = range(sys.dim) if reverse else range(sys.dim - 1, -1, -1)
    fwd = [np.asarray(u, dtype=np.int64) for u in sys.maps]
    inv = [np.asarray(u, dtype=np.int64) for u in sys.inverses]
    for axis in axes:
        for d, off in enumerate(offsets):
            t = int(off[axis])
            u = fwd[axis] if t >= 0 else inv[axis]
            col = table[:, d]
            for _ in range(abs(t)):
                col = u[col]
            table[:, d] = col
    return table


def _ergodic_plan(sys: FiniteSystem, F: BasisFamily):
    plan = trace_plan(F)
    return orbit_table(sys, plan.offsets), plan


def _all_masks(k: int, cap: int) -> np.ndarray:
    if k > cap:
        raise CapExceeded(f"system has {k} atoms; exhaustive cap is {cap}")
    return np.arange(1, 1 << k, dtype=np.int64)


def _mask_atoms(mask: int) -> frozenset:
    return frozenset(i for i in range(mask.bit_length()) if (mask >> i) & 1)


def ergodic_tauberian_sweep(sys: FiniteSystem, F: BasisFamily, grid: Sequence,
                            cap: int = EXHAUSTIVE_CAP) -> list[TauberianEstimate]:
    """Exact ``max_E mu{M* chi_E > alpha} / mu(E)`` over all nonempty ``E``, per alpha."""
    _check_dim(sys, F)
    fr = [check_alpha(a) for a in grid]
    table, plan = _ergodic_plan(sys, F)
    anum = np.array([a.numerator for a in fr], dtype=np.int64)
    aden = np.array([a.denominator for a in fr], dtype=np.int64)
    level, meas, best = kernels.exhaustive_ergodic(table, plan.parent, plan.dstart, plan.sizes,
                                                   sys.integer_weights, _all_masks(sys.size, cap), anum, aden)
    return [TauberianEstimate(a, Fraction(int(lv), int(me)), _mask_atoms(int(mk)), EXACT, F.descriptor())
            for a, lv, me, mk in zip(fr, level, meas, best)]


def ergodic_tauberian_exhaustive(sys: FiniteSystem, F: BasisFamily, alpha,
                                 cap: int = EXHAUSTIVE_CAP) -> TauberianEstimate:
    return ergodic_tauberian_sweep(sys, F, [alpha], cap)[0]


# -- orbit sections and transference --------------------------------------------------

@dataclass(frozen=True)
class OrbitSection:
    """``t -> chi_E(U^t w) chi_{(-T,T)^n}(t)`` on the integer window of ``(-T, T)^n``."""

    base: int
    horizon: int
    values: dict

    @property
    def support(self) -> LatticeSet:
        n = len(next(iter(self.values)))
        W = Window.cube(n, -self.horizon + 1, self.horizon - 1)
        return LatticeSet.from_points([t for t, v in self.values.items() if v], W)


def orbit_section(sys: FiniteSystem, E, w: int, T: int) -> OrbitSection:
    if T < 1:
        raise ValueError("horizon must be >= 1")
    E = _atom_set(sys, E)
    W = Window.cube(sys.dim, -T + 1, T - 1)
    return OrbitSection(w, T, {t: int(sys.act(t, w) in E) for t in W.points()})


def orbit_window_set(sys: FiniteSystem, E, w: int, r: int, T: int) -> LatticeSet:
    """Integer ``t`` in ``(-r-T, r+T)^n`` with ``U^t w`` in ``E`` (full Z^n window)."""
    if r < 1 or T < 1:
        raise ValueError("r and T must be >= 1")
    return orbit_section(sys, E, w, r + T).support


def _report_value(x):
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, (tuple, list)):
        return [_report_value(v) for v in x]
    if isinstance(x, (frozenset, set)):
        return sorted(_report_value(v) for v in x)
    if isinstance(x, dict):
        return {str(k): _report_value(v) for k, v in x.items()}
    if isinstance(x, np.integer):
        return int(x)
    return x


@dataclass
class Report:
    name: str
    passed: bool
    details: dict = field(default_factory=dict)
    counterexample: dict | None = None

    def to_json(self) -> str:
        return json.dumps({"check": self.name, "passed": self.passed,
                           "details": _report_value(self.details),
                           "counterexample": _report_value(self.counterexample)},
                          sort_keys=True, indent=2)


def _shift_window(n: int, T: int) -> Window:
    return Window.cube(n, -T, T)


def transference_identity_check(sys: FiniteSystem, E, F: BasisFamily, T: int) -> Report:
    """Compare, for every atom ``w`` and ``m`` in ``[-T, T]^n``, the ergodic
    value at ``w`` with the discrete value at ``m`` of the orbit section of
    ``U^{-m} w`` at horizon ``r + T``."""
    _check_dim(sys, F)
    E = _atom_set(sys, E)
    r = F.truncation
    left = ergodic_maximal_field(sys, E, F)
    checked = 0
    neg = lambda m: tuple(-x for x in m)  # noqa: E731
    for w in range(sys.size):
        for m in _shift_window(sys.dim, T).points():
            base = sys.act(neg(m), w)
            section = orbit_section(sys, E, base, r + T).support
            right = maximal_field(section, F, Window(m, m)).value(m)
            checked += 1
            if right != left[w]:
                return Report("transference-identity", False, {"checked": checked},
                              {"E": E, "atom": w, "m": m, "left": left[w], "right": right})
    return Report("transference-identity", True, {"checked": checked, "r": r, "T": T})


def transference_identity_batch(sys: FiniteSystem, F: BasisFamily, T: int,
                                masks: np.ndarray | None = None) -> Report:
    """The same identity for many sets at once (default: every subset of atoms).

    Left side: orbit counts from each atom. Right side: the lattice field of
    the orbit section (summed-area tables for boxes), built with the opposite
    composition order of the maps.
    """
    _check_dim(sys, F)
    k, n, r = sys.size, sys.dim, F.truncation
    if masks is None:
        masks = _all_masks(k, 62)
    masks = np.asarray(masks, dtype=np.int64)
    plan = trace_plan(F)
    left_table = orbit_table(sys, plan.offsets)
    S = Window.cube(n, -(r + T) + 1, r + T - 1)
    cells = np.array(list(S.points()), dtype=np.int64).reshape(-1, n)
    sec_table = orbit_table(sys, cells, reverse=True)
    M = _shift_window(n, T)
    m_pts = np.array(list(M.points()), dtype=np.int64).reshape(-1, n)
    m_flat = bases(M, S)
    m_atoms = sec_table[:, m_flat]  # U^m applied to each section base
    use_box = F.all_boxes
    if use_box:
        bp = box_plan(F)
        pshape = tuple(s + 1 for s in S.shape)
        m_bases = bases(M, S, pshape)
        corner = bp.corner_deltas(pshape)
        signs = bp.signs
    else:
        pshape = S.shape
        m_bases = m_flat
        corner = np.zeros((len(F), 1), dtype=np.int64)
        signs = np.zeros(1, dtype=np.int64)
    res = kernels.transference_batch(
        masks, left_table, plan.parent, plan.dstart, plan.sizes,
        sec_table, m_bases, m_atoms, use_box, corner, signs,
        np.asarray(pshape, dtype=np.int64), strides(pshape), np.asarray(S.shape, dtype=np.int64),
        plan.parent, plan.dstart, plan.deltas(S.shape))
    checked, fmask, fbase, fm = (int(x) for x in res[:4])
    details = {"sets": len(masks), "checked": checked, "r": r, "T": T, "atoms": k, "family": F.kind}
    if fmask < 0:
        return Report("transference-identity", True, details)
    ln, ld, rn, rd = (int(x) for x in res[4:])
    return Report("transference-identity", False, details,
                  {"E": _mask_atoms(fmask), "section_base": fbase, "m": tuple(int(x) for x in m_pts[fm]),
                   "atom": int(m_atoms[fbase, fm]), "left": Fraction(ln, ld), "right": Fraction(rn, rd)})


def transference_average_check(sys: FiniteSystem, E, F: BasisFamily, alpha, T: int) -> Report:
    """Finite-horizon chain behind the inequality ``C* <= C~``:

    ``mu{M*_r chi_E > alpha}`` equals the ``mu``-average over ``w`` of
    ``#{m in [-T,T]^n : field of F_{E,r+T}(w, .) at m > alpha} / (2T+1)^n``,
    which is at most the average of ``#{M chi_{E_{r,T,w}} > alpha} / (2T+1)^n``;
    and ``sum_w mu(w) #E_{r,T,w} <= (2T+2r+1)^n mu(E)``.
    """
    alpha = check_alpha(alpha)
    E = _atom_set(sys, E)
    n, r = sys.dim, F.truncation
    lhs = ergodic_level_measure(sys, ergodic_maximal_field(sys, E, F), alpha)
    M = _shift_window(n, T)
    vol = (2 * T + 1) ** n
    middle, upper, mass = Fraction(0), Fraction(0), Fraction(0)
    for w in range(sys.size):
        sec = orbit_window_set(sys, E, w, r, T)
        inside = maximal_field(sec, F, M)
        middle += sys.weights[w] * Fraction(len(level_set(inside, alpha)), vol)
        upper += sys.weights[w] * Fraction(len(level_set(maximal_field(sec, F), alpha)), vol)
        mass += sys.weights[w] * len(sec)
    factor = Fraction(2 * T + 2 * r + 1, 2 * T + 1) ** n
    ok = lhs == middle and middle <= upper and mass <= (2 * T + 2 * r + 1) ** n * sys.measure(E)
    return Report("transference-average", ok,
                  {"level_measure": lhs, "section_average": middle, "dilated_average": upper,
                   "orbit_mass": mass, "mu_E": sys.measure(E), "boundary_factor": factor})


def transference_inequality_check(sys: FiniteSystem, F: BasisFamily, alpha, discrete_bound,
                                  cap: int = EXHAUSTIVE_CAP) -> Report:
    """Exact ergodic Tauberian value on ``sys`` against a discrete bound."""
    est = ergodic_tauberian_exhaustive(sys, F, alpha, cap)
    bound = Fraction(discrete_bound)
    return Report("transference-inequality", est.value <= bound,
                  {"alpha": est.alpha, "ergodic_value": est.value, "discrete_bound": bound,
                   "margin": bound - est.value, "witness": est.witness})


# -- system files -------------------------------------------------------------------

def dump_system(sys: FiniteSystem) -> str:
    lines = [f"atoms={sys.size}", "weights=" + " ".join(str(w) for w in sys.weights)]
    lines.extend(" ".join(map(str, u)) for u in sys.maps)
    return "\n".join(lines) + "\n"


def load_system(text: str) -> FiniteSystem:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines[0].startswith("atoms=") or not lines[1].startswith("weights="):
        raise ValueError("system file must start with atoms= and weights= lines")
    k = int(lines[0].split("=", 1)[1])
    weights = [Fraction(x) for x in lines[1].split("=", 1)[1].split()]
    maps = [tuple(int(x) for x in ln.split()) for ln in lines[2:]]
    if len(weights) != k or any(len(u) != k for u in maps):
        raise InvalidSystem(f"expected {k} weights and permutations of length {k}")
    return FiniteSystem(tuple(weights), tuple(maps))
