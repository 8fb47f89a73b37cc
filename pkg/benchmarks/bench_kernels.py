"""Time the numba kernels against the pure-numpy fallback on typical workloads.

    python3 benchmarks/bench_kernels.py [--repeat 3]

Each workload runs once untimed (JIT compilation / cache load), then the best
of ``--repeat`` runs is reported. Results from the two backends are compared
for equality before any timing is printed.
"""
import argparse
import time
from fractions import Fraction

from solyanik import kernels
from solyanik.ergodic import cycle_type_system, ergodic_tauberian_sweep, product_cyclic_system, transference_identity_batch
from solyanik.lattice import LatticeSet, Window, make_family
from solyanik.maximal import maximal_field
from solyanik.tauberian import exhaustive_sweep

GRID = [Fraction(k, 10) for k in range(1, 10)]


def workloads():
    W3 = Window.cube(3, -6, 6)
    E3 = LatticeSet.from_points([p for p in W3.points() if sum(p) % 3 == 0], W3)
    W2 = Window.cube(2, -10, 10)
    E2 = LatticeSet.from_points([p for p in W2.points() if (p[0] * p[1]) % 4 == 1], W2)
    return {
        "box field 3D, r=4": lambda: maximal_field(E3, make_family("box", 3, 4)),
        "centered field 2D, r=6": lambda: maximal_field(E2, make_family("centered-ball", 2, 6)),
        "exhaustive 1D window 16, box r=4": lambda: exhaustive_sweep(Window((0,), (15,)), make_family("box", 1, 4), GRID),
        "exhaustive 2D 4x4, box r=2": lambda: exhaustive_sweep(Window((0, 0), (3, 3)), make_family("box", 2, 2), GRID),
        "ergodic sweep 12 atoms, centered r=13": lambda: ergodic_tauberian_sweep(
            cycle_type_system((5, 4, 3), (1, 2, 3)), make_family("centered-ball", 1, 13), GRID),
        "transference 3x3, box r=2 T=2": lambda: transference_identity_batch(
            product_cyclic_system(3, 3), make_family("box", 2, 2), 2),
    }


def run_with(table, fn):
    saved = {name: getattr(kernels, name) for name in table}
    try:
        for name, impl in table.items():
            setattr(kernels, name, impl)
        return fn()
    finally:
        for name, impl in saved.items():
            setattr(kernels, name, impl)


def best_time(table, fn, repeat):
    run_with(table, fn)
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        run_with(table, fn)
        times.append(time.perf_counter() - t)
    return min(times)


def _comparable(result):
    if isinstance(result, list):
        return [(e.value, e.witness) for e in result]
    if hasattr(result, "passed"):
        return (result.passed, result.details)
    return result


def main():
    parser = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()
    if not kernels.NUMBA_KERNELS:
        raise SystemExit("numba is not available (or SOLYANIK_BACKEND=numpy is set)")
    print(f"{'workload':42s} {'numba':>10s} {'numpy':>10s} {'speedup':>8s}")
    for label, fn in workloads().items():
        a = run_with(kernels.NUMBA_KERNELS, fn)
        b = run_with(kernels.NUMPY_KERNELS, fn)
        if _comparable(a) != _comparable(b):
            raise SystemExit(f"backends disagree on {label!r}")
        t_nb = best_time(kernels.NUMBA_KERNELS, fn, args.repeat)
        t_np = best_time(kernels.NUMPY_KERNELS, fn, args.repeat)
        print(f"{label:42s} {t_nb * 1e3:9.1f}ms {t_np * 1e3:9.1f}ms {t_np / t_nb:7.1f}x")


if __name__ == "__main__":
    main()
