"""Closed-form quantities, reference exponents and log-log exponent fits.

This is the one floating-point module. Formula evaluations are checked to a
relative tolerance of 1e-9 unless a test says otherwise.
"""
from __future__ import annotations

import hashlib
import itertools
import json
import math
from dataclasses import asdict, dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

FORMULA_RTOL = 1e-9


def unit_ball_volume(n: int) -> float:
    return math.pi ** (n / 2) / math.gamma(n / 2 + 1)


@dataclass(frozen=True)
class AnalysisConstants:
    """``C_n`` (lattice-count constant, the unit-ball volume by convention) and
    ``A_n`` (Besicovitch overlap constant; only ``A_1 = 2`` is certified)."""

    n: int
    C_n: float
    A_n: float
    A_certified: bool = False

    def __post_init__(self):
        if self.C_n <= 0:
            raise ValueError("C_n must be positive")
        if self.A_n < 1:
            raise ValueError("A_n must be >= 1")

    @classmethod
    def for_dimension(cls, n: int, A_n: float | None = None) -> "AnalysisConstants":
        if A_n is None:
            if n != 1:
                raise ValueError(f"no certified Besicovitch constant for n={n}; pass A_n")
            return cls(1, unit_ball_volume(1), 2.0, True)
        return cls(n, unit_ball_volume(n), float(A_n), n == 1 and A_n == 2)


def solyanik_c_threshold(n: int, C_n: float | None = None) -> float:
    """Smallest alpha with ``(C_n (1 - alpha))^(-1/n) > 2 sqrt(n)``."""
    C_n = unit_ball_volume(n) if C_n is None else C_n
    return 1.0 - 1.0 / (C_n * (2.0 * math.sqrt(n)) ** n)


def solyanik_c(alpha: float, n: int, C_n: float | None = None) -> float:
    """``alpha * ((s - 2 sqrt n) / (s + sqrt n))^n`` with ``s = (C_n (1-alpha))^(-1/n)``."""
    C_n = unit_ball_volume(n) if C_n is None else C_n
    if not 0 < alpha < 1:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    s = (C_n * (1.0 - alpha)) ** (-1.0 / n)
    root = math.sqrt(n)
    if s - 2 * root <= 0:
        raise ValueError(f"alpha={alpha} is below the domain threshold "
                         f"{solyanik_c_threshold(n, C_n)!r} for n={n}")
    return alpha * ((s - 2 * root) / (s + root)) ** n


def solyanik_c_rate(n: int, alphas: Sequence[float], C_n: float | None = None) -> float:
    """``max (1 - c(alpha, n)) / (1 - alpha)^(1/n)`` over ``alphas``."""
    return max((1.0 - solyanik_c(a, n, C_n)) / (1.0 - a) ** (1.0 / n) for a in alphas)


@dataclass(frozen=True)
class SandwichResult:
    count: int
    lower: float | None  # None when r <= sqrt(n) makes the bound vacuous
    upper: float
    passed: bool


def _count_open_interval(c: Fraction, R: Fraction) -> int:
    """``#{x in Z : (x - c)^2 < R}``, exact."""
    if R <= 0:
        return 0
    h = math.sqrt(float(R))
    lo, hi = math.floor(c - Fraction(h)) - 1, math.ceil(c + Fraction(h)) + 1
    while lo <= hi and (lo - c) ** 2 >= R:
        lo += 1
    while hi >= lo and (hi - c) ** 2 >= R:
        hi -= 1
    return max(0, hi - lo + 1)


def lattice_count_open_ball(center: Sequence, r, n: int) -> int:
    """``#{j in Z^n : |j - c| < r}``, exact for rational ``c`` and any finite ``r``."""
    c = [Fraction(x) for x in center]
    if len(c) != n:
        raise ValueError("center has the wrong dimension")
    r2 = Fraction(r) ** 2
    ranges = [range(math.floor(ci - Fraction(r)) - 1, math.ceil(ci + Fraction(r)) + 2) for ci in c[:-1]]
    count = 0
    for j in itertools.product(*ranges):
        rest = r2 - sum((ji - ci) ** 2 for ji, ci in zip(j, c))
        count += _count_open_interval(c[-1], rest)
    return count


def ball_count_sandwich(center: Sequence, r: float, n: int) -> SandwichResult:
    """Check ``C_n (r - sqrt n)^n <= #(B(c, r) & Z^n) <= C_n (r + sqrt n)^n`` with ``C_n = |B_1|``."""
    if r <= 0:
        raise ValueError("radius must be positive")
    if n > 3:
        raise ValueError("enumeration supported for n <= 3")
    C_n = unit_ball_volume(n)
    count = lattice_count_open_ball(center, r, n)
    root = math.sqrt(n)
    upper = C_n * (r + root) ** n
    lower = C_n * (r - root) ** n if r > root else None
    ok = count <= upper * (1 + FORMULA_RTOL)
    if lower is not None:
        ok = ok and lower <= count * (1 + FORMULA_RTOL)
    return SandwichResult(count, lower, upper, ok)


EXPONENT_TABLE = {
    # (basis kind, setting) -> exponent as a function of n
    ("strong", "geometric"): lambda n: Fraction(1, n),
    ("strong", "discrete"): lambda n: Fraction(1, n),
    ("strong", "ergodic"): lambda n: Fraction(1, n),
    ("centered", "geometric"): lambda n: Fraction(1),
    ("centered", "discrete"): lambda n: Fraction(1),
    ("centered", "ergodic"): lambda n: Fraction(1),
    ("uncentered", "geometric"): lambda n: Fraction(1, n + 1),
    ("uncentered", "discrete"): lambda n: Fraction(1, n * (n + 1)),
    ("uncentered", "ergodic"): lambda n: Fraction(1, n * (n + 1)),
}


def theoretical_exponent(basis_kind: str, setting: str, n: int) -> Fraction:
    """Power ``gamma`` in ``C(alpha) - 1 <~ (1/alpha - 1)^gamma`` as alpha -> 1-."""
    if n < 1:
        raise ValueError("n must be >= 1")
    try:
        return EXPONENT_TABLE[(basis_kind, setting)](n)
    except KeyError:
        raise ValueError(f"unknown basis kind/setting {basis_kind!r}/{setting!r}") from None


def centered_bound(alpha, A_n=2):
    """``1 + A_n (1 - alpha) / alpha``; exact when both inputs are rational."""
    if isinstance(alpha, float) or isinstance(A_n, float):
        alpha, A_n = float(alpha), float(A_n)
    else:
        alpha, A_n = Fraction(alpha), Fraction(A_n)
    if not 0 < alpha < 1:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    return 1 + A_n * (1 - alpha) / alpha


@dataclass(frozen=True)
class ExponentFit:
    points: tuple
    slope: float
    intercept: float
    residual: float  # root-mean-square of the fit residuals
    dropped: int
    digest: str

    def to_json(self) -> str:
        d = asdict(self)
        d.pop("points")
        return json.dumps(d, sort_keys=True)


def fit_exponent(sweep: Sequence[tuple]) -> ExponentFit:
    """Least squares of ``log(value - 1)`` against ``log(1/alpha - 1)``.

    Points with ``value <= 1`` cannot be logged; they are dropped and counted.
    """
    digest = hashlib.sha256(repr([(str(a), str(v)) for a, v in sweep]).encode()).hexdigest()
    pts, dropped = [], 0
    for alpha, value in sweep:
        if value <= 1:
            dropped += 1
            continue
        pts.append((math.log(1 / float(alpha) - 1), math.log(float(value) - 1)))
    if len(pts) < 2:
        raise ValueError(f"need at least 2 points with value > 1, got {len(pts)}")
    x = np.array([p[0] for p in pts])
    y = np.array([p[1] for p in pts])
    xm, ym = math.fsum(x) / len(x), math.fsum(y) / len(y)
    sxx = math.fsum((x - xm) ** 2)
    if sxx == 0:
        raise ValueError("all alphas coincide")
    slope = math.fsum((x - xm) * (y - ym)) / sxx
    intercept = ym - slope * xm
    res = y - (slope * x + intercept)
    residual = math.sqrt(math.fsum(res ** 2) / len(res))
    return ExponentFit(tuple(pts), slope, intercept, residual, dropped, digest)
