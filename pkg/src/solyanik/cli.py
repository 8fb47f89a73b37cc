"""Config-driven experiment runner.

    solyanik tauberian --config sweep.json --out runs/a --seed 7 --threads 4
    solyanik verify transference

Configs are JSON; every alpha (and any other exact quantity) is an ``"a/b"``
string. Exit codes: 0 success, 2 invalid config or arguments (nothing is
written), 3 enumeration cap exceeded, 4 property violation (a
``counterexample.json`` is written next to the report).
"""
from __future__ import annotations

import argparse
import hashlib
import json
import os
import re
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__, analysis, checks
from ._accel import backend_name
from .ergodic import (FiniteSystem, cycle_type_system, ergodic_level_measure, ergodic_maximal_field,
                      ergodic_tauberian_sweep, load_system, make_finite_system, product_cyclic_system,
                      random_commuting_system, transference_average_check, transference_identity_batch,
                      transference_identity_check, transference_inequality_check)
from .errors import CapExceeded, SolyanikError
from .lattice import KINDS, LatticeSet, Window, make_family
from .maximal import default_window, level_set, maximal_field
from .tauberian import EXACT, SEARCH, alpha_sweep, sweep_to_csv

EXIT_OK, EXIT_CONFIG, EXIT_CAP, EXIT_VIOLATION = 0, 2, 3, 4
THREADS_ENV = "SOLYANIK_THREADS"

EXPERIMENTS = {
    "maximal": "maximal-field",
    "tauberian": "tauberian-sweep",
    "ergodic": "ergodic-check",
    "transfer": "transference",
    "fit": "analysis-fit",
}

_RATIONAL = re.compile(r"^\s*-?\d+(\s*/\s*\d+)?\s*$")


class ConfigError(ValueError):
    """Raised for anything that makes a config unusable (exit code 2)."""


# -- parsing helpers ------------------------------------------------------------------

def rational(value, what: str) -> Fraction:
    if isinstance(value, bool) or isinstance(value, float):
        raise ConfigError(f"{what}: floats are not allowed, write a rational as \"a/b\"")
    if isinstance(value, int):
        return Fraction(value)
    if not isinstance(value, str) or not _RATIONAL.match(value):
        raise ConfigError(f"{what}: expected a rational string \"a/b\", got {value!r}")
    try:
        return Fraction(value.replace(" ", ""))
    except ZeroDivisionError:
        raise ConfigError(f"{what}: zero denominator") from None


def _alphas(cfg: dict, required: bool = True) -> list[Fraction]:
    raw = cfg.get("alphas")
    if raw is None:
        if required:
            raise ConfigError("missing 'alphas'")
        return []
    if not isinstance(raw, list) or not raw:
        raise ConfigError("'alphas' must be a nonempty list")
    out = [rational(a, "alphas") for a in raw]
    for a in out:
        if not 0 < a < 1:
            raise ConfigError(f"alpha {a} is outside (0, 1)")
    if any(b <= a for a, b in zip(out, out[1:])):
        raise ConfigError("'alphas' must be strictly increasing")
    return out


def _int(cfg: dict, key: str, default=None, minimum=None) -> int:
    val = cfg.get(key, default)
    if val is None:
        raise ConfigError(f"missing '{key}'")
    if isinstance(val, bool) or not isinstance(val, int):
        raise ConfigError(f"'{key}' must be an integer")
    if minimum is not None and val < minimum:
        raise ConfigError(f"'{key}' must be >= {minimum}")
    return val


def _points(raw, n: int, what: str) -> list[tuple]:
    if not isinstance(raw, list):
        raise ConfigError(f"'{what}' must be a list of points")
    pts = []
    for p in raw:
        p = [p] if isinstance(p, int) and not isinstance(p, bool) else p
        if not isinstance(p, list) or len(p) != n or not all(isinstance(x, int) and not isinstance(x, bool) for x in p):
            raise ConfigError(f"'{what}': bad point {p!r} for dimension {n}")
        pts.append(tuple(p))
    return pts


def _family(cfg: dict, n: int):
    basis = cfg.get("basis")
    if not isinstance(basis, dict):
        raise ConfigError("missing 'basis' object")
    kind = basis.get("kind")
    if kind not in KINDS:
        raise ConfigError(f"basis kind must be one of {', '.join(KINDS)}")
    r = _int(basis, "r", minimum=1)
    q = _int(basis, "q", 1, minimum=1)
    try:
        return make_family(kind, n, r, q)
    except CapExceeded:
        raise
    except (SolyanikError, ValueError) as exc:
        raise ConfigError(f"basis: {exc}") from None


def _window(cfg: dict, n: int, required: bool):
    w = cfg.get("window")
    if w is None:
        if required:
            raise ConfigError("missing 'window'")
        return None
    if not isinstance(w, dict):
        raise ConfigError("'window' must be an object with 'lo' and 'hi'")
    lo, hi = _points([w.get("lo")], n, "window.lo")[0], _points([w.get("hi")], n, "window.hi")[0]
    try:
        return Window(lo, hi)
    except ValueError as exc:
        raise ConfigError(f"window: {exc}") from None


def _system(cfg: dict, base: Path) -> FiniteSystem:
    spec = cfg.get("system")
    kinds = {"cyclic", "cycles", "maps", "file", "random"}
    if not isinstance(spec, dict) or len(kinds & spec.keys()) != 1:
        raise ConfigError("'system' must give exactly one of: cyclic, cycles, maps (+weights), file, random")
    try:
        if "cyclic" in spec:
            return product_cyclic_system(*[int(x) for x in spec["cyclic"]])
        if "cycles" in spec:
            w = spec.get("weights")
            return cycle_type_system(spec["cycles"], None if w is None else [rational(x, "weights") for x in w])
        if "maps" in spec:
            k = len(spec["maps"][0])
            w = spec.get("weights") or [f"1/{k}"] * k
            return make_finite_system([rational(x, "weights") for x in w], spec["maps"])
        if "file" in spec:
            return load_system((base / spec["file"]).read_text())
        if "random" in spec:
            r = spec["random"]
            return random_commuting_system(np.random.default_rng(_int(r, "seed")), r["blocks"],
                                           bool(r.get("random_weights", True)))
    except ConfigError:
        raise
    except (SolyanikError, ValueError, TypeError, KeyError, IndexError, OSError) as exc:
        raise ConfigError(f"system: {exc}") from None
    raise ConfigError("unknown system specification")


# -- experiments -----------------------------------------------------------------------
# Each runner validates first and returns {filename: text}; nothing touches
# the output directory until everything has been computed.

def _json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _frac(x) -> str:
    return str(Fraction(x))


def run_maximal(cfg: dict, ctx: dict) -> dict:
    n = _int(cfg, "dim", minimum=1)
    F = _family(cfg, n)
    E = LatticeSet.from_points(_points(cfg.get("set", []), n, "set"), dim=n)
    W = _window(cfg, n, False) or default_window(E, F)
    alphas = _alphas(cfg, required=False)
    field = maximal_field(E, F, W)
    files = {"field.csv": field.to_csv()}
    if alphas:
        files["levels.json"] = _json({"family": F.descriptor(), "levels": [
            {"alpha": _frac(a), "count": len(level_set(field, a)),
             "points": [list(p) for p in level_set(field, a).sorted_points()]} for a in alphas]})
    return files


def run_tauberian(cfg: dict, ctx: dict) -> dict:
    n = _int(cfg, "dim", minimum=1)
    F = _family(cfg, n)
    W = _window(cfg, n, True)
    alphas = _alphas(cfg)
    mode = {"exact": EXACT, EXACT: EXACT, "search": SEARCH, SEARCH: SEARCH}.get(cfg.get("mode", "exact"))
    if mode is None:
        raise ConfigError("'mode' must be 'exact' or 'search'")
    budget = _int(cfg, "budget", 1000, minimum=1)
    cap = _int(cfg, "cap", 20, minimum=1)
    seed = ctx["seed"]
    if mode == SEARCH:
        if seed is None:
            raise ConfigError("search mode needs a seed (config 'seed' or --seed)")
        # independent alpha points run in parallel; map() keeps grid order
        with ThreadPoolExecutor(ctx["threads"]) as pool:
            ests = [e for chunk in pool.map(lambda a: alpha_sweep(W, F, [a], SEARCH, budget, seed), alphas)
                    for e in chunk]
    else:
        ests = alpha_sweep(W, F, alphas, EXACT, cap=cap)
    witnesses = {"family": F.descriptor(), "window": {"lo": list(W.lo), "hi": list(W.hi)}, "estimates": [
        {"alpha": _frac(e.alpha), "value": _frac(e.value), "witness": [list(p) for p in e.witness.sorted_points()]}
        for e in ests]}
    return {"sweep.csv": sweep_to_csv(ests), "witnesses.json": _json(witnesses)}


def run_ergodic(cfg: dict, ctx: dict) -> dict:
    system = _system(cfg, ctx["base"])
    F = _family(cfg, system.dim)
    alphas = _alphas(cfg, required=False)
    out = {"atoms": system.size, "dim": system.dim, "family": F.descriptor()}
    if "set" in cfg:
        E = cfg["set"]
        if not isinstance(E, list) or not all(isinstance(x, int) and 0 <= x < system.size for x in E):
            raise ConfigError("'set' must list atoms of the system")
        values = ergodic_maximal_field(system, E, F)
        out["set"] = sorted(E)
        out["field"] = [_frac(values[w]) for w in range(system.size)]
        out["levels"] = [{"alpha": _frac(a), "measure": _frac(ergodic_level_measure(system, values, a))}
                         for a in alphas]
    if cfg.get("tauberian", False):
        if not alphas:
            raise ConfigError("'tauberian' needs 'alphas'")
        ests = ergodic_tauberian_sweep(system, F, alphas, _int(cfg, "cap", 20, minimum=1))
        out["tauberian"] = [{"alpha": _frac(e.alpha), "value": _frac(e.value), "witness": sorted(e.witness)}
                            for e in ests]
    return {"ergodic.json": _json(out)}


def run_transfer(cfg: dict, ctx: dict) -> dict:
    system = _system(cfg, ctx["base"])
    F = _family(cfg, system.dim)
    T = _int(cfg, "T", minimum=1)
    alphas = _alphas(cfg, required=False)
    cap = _int(cfg, "cap", 20, minimum=1)
    reports = []
    if "set" in cfg:
        E = cfg["set"]
        if not isinstance(E, list) or not all(isinstance(x, int) and 0 <= x < system.size for x in E):
            raise ConfigError("'set' must list atoms of the system")
        reports.append(transference_identity_check(system, E, F, T))
        with ThreadPoolExecutor(ctx["threads"]) as pool:
            reports.extend(pool.map(lambda a: transference_average_check(system, E, F, a, T), alphas))
    else:
        if system.size > cap:
            raise CapExceeded(f"{system.size} atoms: all-subsets identity check is capped at {cap}")
        reports.append(transference_identity_batch(system, F, T))
    if "discrete_bound" in cfg:
        bound = rational(cfg["discrete_bound"], "discrete_bound")
        if system.size > cap:
            raise CapExceeded(f"{system.size} atoms exceeds exhaustive cap {cap}")
        for a in alphas:
            reports.append(transference_inequality_check(system, F, a, bound, cap))
    ok = all(r.passed for r in reports)
    doc = {"identity": "pass" if reports[0].passed else "fail", "passed": ok,
           "reports": [json.loads(r.to_json()) for r in reports]}
    files = {"transference.json": _json(doc)}
    bad = next((r for r in reports if not r.passed), None)
    if bad is not None:
        files["counterexample.json"] = bad.to_json() + "\n"
    return files


def _sweep_points(cfg: dict, base: Path) -> list[tuple[Fraction, Fraction]]:
    if "sweep" in cfg:
        raw = cfg["sweep"]
        if not isinstance(raw, list) or not all(isinstance(p, list) and len(p) == 2 for p in raw):
            raise ConfigError("'sweep' must be a list of [alpha, value] pairs")
        return [(rational(a, "sweep alpha"), rational(v, "sweep value")) for a, v in raw]
    if "sweep_csv" in cfg:
        try:
            lines = (base / cfg["sweep_csv"]).read_text().splitlines()
        except OSError as exc:
            raise ConfigError(f"sweep_csv: {exc}") from None
        head = lines[0].split(",")
        try:
            idx = [head.index(c) for c in ("alpha_num", "alpha_den", "value_num", "value_den")]
            rows = [ln.split(",") for ln in lines[1:] if ln.strip()]
            return [(Fraction(int(r[idx[0]]), int(r[idx[1]])), Fraction(int(r[idx[2]]), int(r[idx[3]])))
                    for r in rows]
        except (ValueError, IndexError, ZeroDivisionError):
            raise ConfigError("sweep_csv: not a sweep.csv file") from None
    raise ConfigError("fit needs 'sweep' or 'sweep_csv'")


def run_fit(cfg: dict, ctx: dict) -> dict:
    pts = _sweep_points(cfg, ctx["base"])
    try:
        fit = analysis.fit_exponent(pts)
    except ValueError as exc:
        raise ConfigError(f"fit: {exc}") from None
    doc = json.loads(fit.to_json())
    theory = cfg.get("theory")
    if theory is not None:
        try:
            gamma = analysis.theoretical_exponent(theory["kind"], theory["setting"], _int(theory, "n", minimum=1))
        except (KeyError, ValueError, TypeError) as exc:
            raise ConfigError(f"theory: {exc}") from None
        doc["theoretical_exponent"] = str(gamma)
    return {"fit.json": _json(doc)}


RUNNERS = {"maximal": run_maximal, "tauberian": run_tauberian, "ergodic": run_ergodic,
           "transfer": run_transfer, "fit": run_fit}


# -- driver ---------------------------------------------------------------------------------

def config_digest(cfg: dict) -> str:
    return hashlib.sha256(json.dumps(cfg, sort_keys=True, separators=(",", ":")).encode()).hexdigest()


def resolve_threads(flag: int | None) -> int:
    if flag is not None:
        return flag
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            k = int(env)
        except ValueError:
            raise ConfigError(f"{THREADS_ENV} must be an integer") from None
        if k < 1:
            raise ConfigError(f"{THREADS_ENV} must be >= 1")
        return k
    return 1


def load_config(path: str) -> dict:
    try:
        cfg = json.loads(Path(path).read_text(), parse_float=_no_float)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON: {exc}") from None
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    return cfg


def _no_float(text: str):
    raise ConfigError(f"floats are not allowed in configs (found {text}); use \"a/b\" strings")


def run(command: str, cfg: dict, out: Path, seed: int | None = None, threads: int = 1,
        base: Path = Path(".")) -> int:
    expected = EXPERIMENTS[command]
    if cfg.get("experiment", expected) != expected:
        raise ConfigError(f"config experiment {cfg['experiment']!r} does not match subcommand {command!r}")
    cfg = dict(cfg, experiment=expected)
    if seed is not None:
        cfg["seed"] = seed
    elif "seed" in cfg and (isinstance(cfg["seed"], bool) or not isinstance(cfg["seed"], int) or cfg["seed"] < 0):
        raise ConfigError("'seed' must be a nonnegative integer")
    start = time.perf_counter()
    files = RUNNERS[command](cfg, {"seed": cfg.get("seed"), "threads": threads, "base": base})
    manifest = {"experiment": expected, "config_digest": config_digest(cfg), "version": __version__,
                "backend": backend_name(), "threads": threads, "artifacts": sorted(files),
                "wall_time_s": round(time.perf_counter() - start, 6)}
    files["manifest.json"] = _json(manifest)
    out.mkdir(parents=True, exist_ok=True)
    for name, text in files.items():
        (out / name).write_text(text)
    return EXIT_VIOLATION if "counterexample.json" in files else EXIT_OK


def run_verify(suite: str, out: Path | None) -> int:
    try:
        reports = checks.run_suite(suite)
    except KeyError as exc:
        print(f"error: {exc.args[0]}", file=sys.stderr)
        return EXIT_CONFIG
    ok = all(r.passed for r in reports)
    summary = {"suite": suite, "passed": ok, "total": len(reports),
               "failed": [r.name for r in reports if not r.passed],
               "reports": [json.loads(r.to_json()) for r in reports]}
    for r in reports:
        print(f"{'PASS' if r.passed else 'FAIL'}  {r.name}")
    print(json.dumps({k: summary[k] for k in ("suite", "passed", "total", "failed")}, sort_keys=True))
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        (out / "verify.json").write_text(_json(summary))
        bad = [json.loads(r.to_json()) for r in reports if not r.passed]
        if bad:
            (out / "counterexample.json").write_text(_json(bad))
    return EXIT_OK if ok else EXIT_VIOLATION


def _nonneg(text: str) -> int:
    v = int(text)
    if not 0 <= v < 1 << 64:
        raise argparse.ArgumentTypeError("seed must be a u64")
    return v


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="solyanik", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in RUNNERS:
        p = sub.add_parser(name, help=f"run a {EXPERIMENTS[name]} experiment")
        p.add_argument("--config", required=True, help="JSON config file")
        p.add_argument("--out", default="out", help="artifact directory (default: out)")
        p.add_argument("--seed", type=_nonneg, help="overrides the config seed")
        p.add_argument("--threads", type=_positive, help=f"worker threads (else ${THREADS_ENV}, else 1)")
    p = sub.add_parser("verify", help="run a named verification suite")
    p.add_argument("suite", help=f"one of: all, {', '.join(checks.SUITES)}")
    p.add_argument("--out", help="write verify.json here")
    p.add_argument("--threads", type=_positive, help="accepted for symmetry; suites run serially")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    if args.command == "verify":
        return run_verify(args.suite, None if args.out is None else Path(args.out))
    try:
        threads = resolve_threads(args.threads)
        cfg = load_config(args.config)
        return run(args.command, cfg, Path(args.out), args.seed, threads, Path(args.config).parent)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except CapExceeded as exc:
        print(f"cap exceeded: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (SolyanikError, ValueError, TypeError) as exc:
        # remaining input problems surface from the library's own validation
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
