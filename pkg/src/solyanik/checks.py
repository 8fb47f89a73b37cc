"""Named verification suites (``solyanik verify <suite>``).

Each suite returns a list of :class:`~solyanik.ergodic.Report`; a suite passes
when every report does. The acceptance tests call these same functions.
"""
from __future__ import annotations

import itertools
import math
import random
from fractions import Fraction
from functools import lru_cache

import numpy as np

from . import analysis
from .ergodic import (Report, cycle_type_system, ergodic_maximal_field, ergodic_tauberian_sweep,
                      one_sided_maximal, product_cyclic_system, random_commuting_system,
                      transference_identity_batch)
from .lattice import (LatticeSet, Window, box_average, enumerate_box_family, lift_measure,
                      lifted_box_average, make_family)
from .maximal import maximal_field, maximal_field_naive
from .tauberian import exhaustive_sweep, tauberian_ratio

WIENER_ALPHAS = (Fraction(1, 4), Fraction(1, 2), Fraction(3, 4), Fraction(9, 10))
CENTERED_ALPHAS = (Fraction(1, 2), Fraction(2, 3), Fraction(3, 4), Fraction(9, 10))
TAUBERIAN_ALPHAS = tuple(Fraction(x) for x in ("1/4", "1/3", "2/5", "1/2", "3/5", "2/3", "3/4", "4/5", "9/10"))


@lru_cache(maxsize=None)
def _family(kind: str, n: int, r: int, q: int = 1):
    return make_family(kind, n, r, q)


def _partitions(k: int, largest: int | None = None):
    largest = k if largest is None else largest
    if k == 0:
        yield ()
        return
    for first in range(min(k, largest), 0, -1):
        for rest in _partitions(k - first, first):
            yield (first,) + rest


def small_one_dim_systems(max_atoms: int = 12, seed: int = 0):
    """Every single-permutation system up to ``max_atoms`` atoms with uniform
    weights (one per cycle type, i.e. per isomorphism class), plus one
    randomly weighted copy of each cycle type with at least two cycles."""
    rng = random.Random(seed)
    for k in range(1, max_atoms + 1):
        for parts in _partitions(k):
            yield parts, cycle_type_system(parts)
            if len(parts) > 1:
                w = [rng.randint(1, 5) for _ in parts]
                yield parts, cycle_type_system(parts, w)


# -- criterion suites ---------------------------------------------------------------

ORACLE_KINDS = ("box", "centered-ball", "uncentered-ball", "one-sided")
NAIVE_COST_CAP = 60_000


def _random_instance(rng: random.Random, kind: str):
    """Random (E, F, W) with n <= 3, window side <= 8, truncation <= 4."""
    while True:
        n = 1 if kind == "one-sided" else rng.randint(1, 3)
        r = rng.randint(1, 4)
        if kind == "uncentered-ball" and n == 3:
            r = min(r, 2)
        sides = [rng.randint(1, 8) for _ in range(n)]
        lo = tuple(rng.randint(-4, 4) for _ in range(n))
        W = Window(lo, tuple(a + s - 1 for a, s in zip(lo, sides)))
        F = _family(kind, n, r, rng.randint(1, 2) if kind == "uncentered-ball" else 1)
        cost = W.size * sum(e.size for e in F.elements)
        if cost <= NAIVE_COST_CAP:
            break
    region = W.dilate(r)
    density = rng.random()
    pts = [p for p in region.points() if rng.random() < density]
    return LatticeSet.from_points(pts, region), F, W


@lru_cache(maxsize=None)
def _boxes_by_corners(n: int) -> dict:
    return {e.corners: e for e in _family("box", n, 4).elements}


def oracle_suite(instances: int = 200, seed: int = 1) -> list[Report]:
    """Optimized field equals the naive oracle exactly."""
    rng = random.Random(seed)
    reports = []
    for kind in ORACLE_KINDS:
        bad = None
        for i in range(instances):
            E, F, W = _random_instance(rng, kind)
            if maximal_field(E, F, W) != maximal_field_naive(E, F, W):
                bad = {"instance": i, "set": E.sorted_points(), "window": str(W), "family": F.descriptor()}
                break
        reports.append(Report(f"oracle-equivalence[{kind}]", bad is None, {"instances": instances}, bad))
    return reports


def lift_suite(triples: int = 1000, seed: int = 2) -> list[Report]:
    """Floor-lift average equals the lattice average; the lift has measure #E."""
    rng = random.Random(seed)
    bad = None
    for i in range(triples):
        n = rng.randint(1, 3)
        W = Window.cube(n, -3, 3)
        pts = [p for p in W.points() if rng.random() < rng.random()]
        E = LatticeSet.from_points(pts, W)
        lo = tuple(rng.randint(-3, 0) for _ in range(n))
        hi = tuple(rng.randint(0, 3) for _ in range(n))
        box = _boxes_by_corners(n)[(lo, hi)]
        m = tuple(rng.randint(-4, 4) for _ in range(n))
        a, b = box_average(E, m, box), lifted_box_average(E, m, box)
        if a != b or lift_measure(E) != len(E):
            bad = {"triple": i, "set": pts, "m": m, "box": (lo, hi), "lattice": a, "lifted": b}
            break
    return [Report("lift-identity", bad is None, {"triples": triples}, bad)]


def transference_systems(seed: int = 3):
    """(label, system, [(family, T), ...], masks or None for all subsets)."""
    rng = np.random.default_rng(seed)
    full = [(r, T) for r in (1, 2, 3) for T in (1, 2, 3)]
    out = []
    for N in (1, 2, 3, 5, 7, 8, 12, 16):
        out.append((f"cyclic({N})", product_cyclic_system(N), full))
    for parts in ((3, 2, 2), (5, 4, 1), (6, 6, 2, 2)):
        w = [int(x) for x in rng.integers(1, 6, len(parts))]
        out.append((f"cycles{parts}", cycle_type_system(parts, w), full))
    for N in ((2, 2), (2, 3), (3, 3), (2, 4)):
        out.append((f"cyclic{N}", product_cyclic_system(*N), full))
    for blocks in (((2, 2), (1, 3)), ((3, 1), (1, 2), (2, 1)), ((2, 2), (2, 2), (1, 2))):
        out.append((f"random{blocks}", random_commuting_system(rng, blocks), full))
    heavy = [(1, 1), (1, 3), (2, 2), (3, 1)]
    out.append(("cyclic(4, 4)", product_cyclic_system(4, 4), heavy + [(3, 3)]))
    out.append(("cyclic(3, 5)", product_cyclic_system(3, 5), heavy))
    out.append(("random(((2, 4), (2, 2), (1, 4)))",
                random_commuting_system(rng, ((2, 4), (2, 2), (1, 4))), heavy))
    return out


def transference_suite(seed: int = 3, sample_sets: int = 3000, big_families: bool = True) -> list[Report]:
    """Pointwise transference identity for every set of atoms (sampled on 6 x 6)."""
    reports = []
    systems = transference_systems(seed)
    for label, sys, pairs in systems:
        for r, T in pairs:
            fams = [_family("box", sys.dim, r)]
            if big_families or sys.size <= 9:
                fams.append(_family("centered-ball", sys.dim, r))
                if sys.size <= 9 and r <= 2:
                    fams.append(_family("uncentered-ball", sys.dim, r, 1))
            for F in fams:
                rep = transference_identity_batch(sys, F, T)
                rep.name = f"transference[{label} {F.kind} r={r} T={T}]"
                reports.append(rep)
    rng = np.random.default_rng(seed)
    big = product_cyclic_system(6, 6)
    masks = np.unique(rng.integers(1, 1 << 36, size=sample_sets, dtype=np.int64))
    for r, T in [(r, T) for r in (1, 2, 3) for T in (1, 2, 3)]:
        rep = transference_identity_batch(big, _family("box", 2, r), T, masks)
        rep.name = f"transference[cyclic(6, 6) box r={r} T={T} sampled]"
        reports.append(rep)
    return reports


def centered_suite(max_atoms: int = 12) -> list[Report]:
    """Ergodic Tauberian values of the 1D centered family stay below 1 + 2(1-alpha)/alpha."""
    worst = None
    count = 0
    for parts, sys in small_one_dim_systems(max_atoms):
        F = _family("centered-ball", 1, sys.size + 1)
        for est in ergodic_tauberian_sweep(sys, F, CENTERED_ALPHAS):
            count += 1
            bound = analysis.centered_bound(est.alpha, 2)
            margin = bound - est.value
            if worst is None or margin < worst["margin"]:
                worst = {"cycles": parts, "weights": sys.weights, "alpha": est.alpha,
                         "value": est.value, "bound": bound, "margin": margin, "witness": est.witness}
    ok = worst["margin"] >= 0
    return [Report("centered-transference-bound", ok, {"checks": count, "tightest": worst},
                   None if ok else worst)]


def wiener_suite(max_atoms: int = 12) -> list[Report]:
    """mu{T* chi_E > alpha} <= mu(E)/alpha for every nonempty E (max ratio <= 1/alpha)."""
    worst, count, bad = None, 0, None
    for parts, sys in small_one_dim_systems(max_atoms):
        F = _family("one-sided", 1, sys.size)
        for est in ergodic_tauberian_sweep(sys, F, WIENER_ALPHAS):
            count += 1
            margin = 1 / est.alpha - est.value
            if worst is None or margin < worst["margin"]:
                worst = {"cycles": parts, "alpha": est.alpha, "max_ratio": est.value, "margin": margin}
            if margin < 0 and bad is None:
                bad = dict(worst, witness=est.witness, weights=sys.weights)
    # the kernel route agrees with the direct one-sided operator
    sys = cycle_type_system((5, 3, 1), (1, 2, 3))
    E = {0, 5}
    direct = one_sided_maximal(sys, E)
    via_family = ergodic_maximal_field(sys, E, _family("one-sided", 1, sys.size))
    reports = [Report("wiener-bound", bad is None, {"checks": count, "tightest": worst}, bad),
               Report("one-sided-consistency", direct == via_family, {"system": "cycles(5,3,1)"})]
    return reports


def tauberian_windows(max_cells: int = 16):
    for L in range(1, max_cells + 1):
        yield Window((0,), (L - 1,))
    for a in range(1, max_cells + 1):
        for b in range(1, max_cells // a + 1):
            yield Window((0, 0), (a - 1, b - 1))


TAUBERIAN_FAMILIES = {
    1: [("box", 4, 1), ("centered-ball", 4, 1), ("one-sided", 4, 1), ("box", 3, 1), ("uncentered-ball", 4, 2)],
    2: [("box", 2, 1), ("centered-ball", 2, 1), ("uncentered-ball", 2, 1), ("box", 3, 1)],
}


def tauberian_suite(max_cells: int = 16, alphas=TAUBERIAN_ALPHAS, shift=None) -> list[Report]:
    """Structure of exhaustive constants on every window with at most ``max_cells`` cells."""
    problems = {"at_least_one": None, "antitone": None, "family_monotone": None,
                "translation": None, "witness": None}
    counts = dict.fromkeys(problems, 0)

    def flag(key, info):
        if problems[key] is None:
            problems[key] = info

    for W in tauberian_windows(max_cells):
        n = W.dim
        fams = [_family(k, n, r, q) for k, r, q in TAUBERIAN_FAMILIES[n]]
        values = {}
        for F in fams:
            ests = exhaustive_sweep(W, F, alphas)
            values[F] = ests
            for est in ests:
                counts["at_least_one"] += 1
                if est.value < 1:
                    flag("at_least_one", {"window": str(W), "family": F.descriptor(), "alpha": est.alpha})
            for a, b in zip(ests, ests[1:]):
                counts["antitone"] += 1
                if b.value > a.value:
                    flag("antitone", {"window": str(W), "family": F.descriptor(), "alphas": (a.alpha, b.alpha)})
        for F1, F2 in itertools.permutations(fams, 2):
            if F1.is_subfamily_of(F2):
                for e1, e2 in zip(values[F1], values[F2]):
                    counts["family_monotone"] += 1
                    if e1.value > e2.value:
                        flag("family_monotone", {"window": str(W), "small": F1.descriptor(),
                                                 "large": F2.descriptor(), "alpha": e1.alpha})
        # witnesses reproduce their ratio (a sample of alphas keeps this cheap)
        F = fams[0]
        for est in values[F][:: max(1, len(alphas) // 3)]:
            counts["witness"] += 1
            if tauberian_ratio(est.witness, F, est.alpha) != est.value:
                flag("witness", {"window": str(W), "family": F.descriptor(), "alpha": est.alpha})
        v = shift or tuple([3, -2][:n])
        moved = exhaustive_sweep(W.translate(v), F, alphas)
        for a, b in zip(values[F], moved):
            counts["translation"] += 1
            if a.value != b.value or a.witness.translate(v).points != b.witness.points:
                flag("translation", {"window": str(W), "alpha": a.alpha, "values": (a.value, b.value)})
    return [Report(f"tauberian-{key}", problems[key] is None, {"checks": counts[key]}, problems[key])
            for key in problems]


def known_values_suite(r: int = 8) -> list[Report]:
    """E = {0} in one dimension: box field 1/(|m|+1), centered 1/(2|m|+1), level ratios."""
    E = LatticeSet.from_points([(0,)])
    W = Window((-(r - 1),), (r - 1,))
    box = maximal_field(E, _family("box", 1, r), W)
    cen = maximal_field(E, _family("centered-ball", 1, r), W)
    box_ok = all(box.value((m,)) == Fraction(1, abs(m) + 1) for m in range(-(r - 1), r))
    cen_ok = all(cen.value((m,)) == Fraction(1, 2 * abs(m) + 1) for m in range(-(r - 1), r))
    half = tauberian_ratio(E, _family("box", 1, r), Fraction(1, 2))
    tenths = tauberian_ratio(E, _family("box", 1, r), Fraction(3, 10))
    return [
        Report("known-1d-box-field", box_ok, {"r": r}),
        Report("known-1d-centered-field", cen_ok, {"r": r}),
        Report("known-1d-ratio-alpha-1/2", half == 3, {"expected": 3, "computed": half}),
        Report("known-1d-ratio-alpha-3/10", tenths == 5, {"expected": 5, "computed": tenths}),
    ]


def formulas_suite(instances: int = 500, seed: int = 4, grid_points: int = 100) -> list[Report]:
    """solyanik_c increases towards 1; the lattice-count sandwich holds."""
    reports = []
    for n in (1, 2, 3):
        a0 = analysis.solyanik_c_threshold(n)
        top = 1 - 1e-6
        # geometric spacing in 1 - alpha between the domain edge and 1 - 1e-6
        gaps = np.geomspace((1 - a0) * (1 - 1e-3), 1 - top, grid_points)
        alphas = 1 - gaps
        vals = [analysis.solyanik_c(float(a), n) for a in alphas]
        increasing = all(b > a for a, b in zip(vals, vals[1:]))
        reports.append(Report(f"solyanik-c-increasing[n={n}]", increasing and vals[-1] < 1,
                              {"first": vals[0], "last": vals[-1]}))
        reports.append(Report(f"solyanik-c-near-one[n={n}]", vals[-1] > 0.99,
                              {"alpha": top, "value": vals[-1], "required": 0.99}))
    rng = random.Random(seed)
    for n in (1, 2, 3):
        bad = None
        for _ in range(instances):
            c = tuple(Fraction(rng.randint(-40, 40), rng.randint(1, 8)) for _ in range(n))
            r = rng.uniform(math.sqrt(n) + 0.1, 12)
            res = analysis.ball_count_sandwich(c, r, n)
            if not res.passed:
                bad = {"center": c, "r": r, "count": res.count, "lower": res.lower, "upper": res.upper}
                break
        reports.append(Report(f"ball-count-sandwich[n={n}]", bad is None, {"instances": instances}, bad))
    return reports


def exponents_suite() -> list[Report]:
    reports = []
    for gamma in (0.5, 1.0, 1 / 3):
        alphas = [0.5, 0.6, 0.7, 0.8, 0.9, 0.95, 0.99]
        sweep = [(a, 1 + (1 / a - 1) ** gamma) for a in alphas]
        fit = analysis.fit_exponent(sweep)
        ok = abs(fit.slope - gamma) < 1e-12 and fit.residual < 1e-12
        reports.append(Report(f"fit-planted[{gamma:.6g}]", ok, {"slope": fit.slope, "residual": fit.residual}))
    table_ok = True
    for n in range(1, 7):
        expect = {("strong", s): Fraction(1, n) for s in ("geometric", "discrete", "ergodic")}
        expect.update({("centered", s): Fraction(1) for s in ("geometric", "discrete", "ergodic")})
        expect[("uncentered", "geometric")] = Fraction(1, n + 1)
        expect[("uncentered", "discrete")] = Fraction(1, n * (n + 1))
        expect[("uncentered", "ergodic")] = Fraction(1, n * (n + 1))
        for (kind, setting), val in expect.items():
            table_ok &= analysis.theoretical_exponent(kind, setting, n) == val
    reports.append(Report("theorem-exponent-table", table_ok, {}))
    return reports


DETERMINISM_CONFIGS = {
    "tauberian": {"dim": 1, "basis": {"kind": "box", "r": 4}, "window": {"lo": [-3], "hi": [3]},
                  "alphas": ["1/2", "2/3", "3/4"], "mode": "search", "budget": 300, "seed": 11},
    "maximal": {"dim": 2, "basis": {"kind": "centered-ball", "r": 3}, "set": [[0, 0], [1, 2], [-1, 0]],
                "alphas": ["1/3", "1/2"]},
    "ergodic": {"system": {"cycles": [3, 2], "weights": ["1", "2"]}, "basis": {"kind": "box", "r": 3},
                "set": [0, 3], "alphas": ["1/2"], "tauberian": True},
    "transfer": {"system": {"cyclic": [2, 3]}, "basis": {"kind": "box", "r": 2}, "T": 2},
    "fit": {"sweep": [["1/2", "2"], ["3/4", "3/2"], ["9/10", "11/10"]]},
}


def determinism_suite(workdir=None) -> list[Report]:
    """Each CLI experiment, run twice (1 and 8 threads), writes byte-identical
    artifacts. The manifest records wall time and is left out of the comparison."""
    import json
    import tempfile
    from pathlib import Path

    from .cli import run

    reports = []
    with tempfile.TemporaryDirectory(dir=workdir) as tmp:
        for cmd, cfg in DETERMINISM_CONFIGS.items():
            outs = []
            for threads in (1, 8):
                out = Path(tmp) / f"{cmd}-{threads}"
                run(cmd, json.loads(json.dumps(cfg)), out, threads=threads)
                outs.append({p.name: p.read_bytes() for p in sorted(out.iterdir()) if p.name != "manifest.json"})
            same = outs[0] == outs[1]
            diff = None if same else {"files": sorted(k for k in outs[0].keys() | outs[1].keys()
                                                      if outs[0].get(k) != outs[1].get(k))}
            reports.append(Report(f"determinism[{cmd}]", same, {"artifacts": sorted(outs[0])}, diff))
    return reports


SUITES = {
    "oracle": oracle_suite,
    "lift": lift_suite,
    "transference": transference_suite,
    "centered": centered_suite,
    "wiener": wiener_suite,
    "tauberian": tauberian_suite,
    "known": known_values_suite,
    "formulas": formulas_suite,
    "exponents": exponents_suite,
    "determinism": determinism_suite,
}


def run_suite(name: str) -> list[Report]:
    if name == "all":
        return [rep for key in SUITES for rep in SUITES[key]()]
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; known: {', '.join(['all', *SUITES])}")
    return SUITES[name]()
