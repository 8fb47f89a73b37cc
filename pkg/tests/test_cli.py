import json
import subprocess
import sys

import pytest

from solyanik.cli import config_digest, main

SWEEP = {"dim": 1, "basis": {"kind": "box", "r": 8}, "window": {"lo": [-3], "hi": [3]},
         "alphas": ["1/2", "2/3", "3/4"]}
TRANSFER = {"system": {"cyclic": [2, 3]}, "basis": {"kind": "box", "r": 2}, "T": 2}


def write(tmp_path, cfg, name="cfg.json"):
    p = tmp_path / name
    p.write_text(cfg if isinstance(cfg, str) else json.dumps(cfg))
    return str(p)


def test_tauberian_sweep_csv(tmp_path):
    out = tmp_path / "out"
    assert main(["tauberian", "--config", write(tmp_path, SWEEP), "--out", str(out)]) == 0
    rows = (out / "sweep.csv").read_text().splitlines()
    assert len(rows) == 4
    assert [r.split(",")[2:4] for r in rows[1:]] == [["5", "2"], ["9", "5"], ["3", "2"]]
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["config_digest"] == config_digest(dict(SWEEP, experiment="tauberian-sweep"))
    assert {"version", "wall_time_s"} <= manifest.keys()


def test_transfer_reports_pass(tmp_path):
    out = tmp_path / "out"
    assert main(["transfer", "--config", write(tmp_path, TRANSFER), "--out", str(out)]) == 0
    doc = json.loads((out / "transference.json").read_text())
    assert doc["identity"] == "pass" and doc["passed"]


def test_property_violation_exit_code(tmp_path):
    cfg = {"system": {"cyclic": [5]}, "basis": {"kind": "box", "r": 5}, "T": 1,
           "alphas": ["3/10"], "discrete_bound": "4"}
    out = tmp_path / "out"
    assert main(["transfer", "--config", write(tmp_path, cfg), "--out", str(out)]) == 4
    bad = json.loads((out / "counterexample.json").read_text())
    assert bad["check"] == "transference-inequality" and bad["details"]["ergodic_value"] == "5"


@pytest.mark.parametrize("cfg", [
    "{not json",
    dict(SWEEP, alphas=[0.5]),
    dict(SWEEP, alphas=["3/2"]),
    dict(SWEEP, alphas=["2/3", "1/2"]),
    dict(SWEEP, basis={"kind": "triangle", "r": 2}),
    dict(SWEEP, mode="search"),
    dict(SWEEP, experiment="analysis-fit"),
    {"system": {"maps": [[1, 0, 2], [0, 2, 1]]}, "basis": {"kind": "box", "r": 1}, "T": 1},
])
def test_malformed_config_exit_2_and_no_artifacts(tmp_path, cfg):
    out = tmp_path / "out"
    cmd = "transfer" if isinstance(cfg, dict) and "system" in cfg else "tauberian"
    assert main([cmd, "--config", write(tmp_path, cfg), "--out", str(out)]) == 2
    assert not out.exists()


def test_cap_exit_3(tmp_path):
    out = tmp_path / "out"
    cfg = dict(SWEEP, window={"lo": [0], "hi": [29]})
    assert main(["tauberian", "--config", write(tmp_path, cfg), "--out", str(out)]) == 3
    assert not out.exists()


def test_search_seed_flag_and_threads(tmp_path):
    cfg = dict(SWEEP, mode="search", budget=200)
    p = write(tmp_path, cfg)
    outs = []
    for threads in ("1", "8"):
        out = tmp_path / f"o{threads}"
        assert main(["tauberian", "--config", p, "--out", str(out), "--seed", "9", "--threads", threads]) == 0
        outs.append((out / "sweep.csv").read_bytes() + (out / "witnesses.json").read_bytes())
    assert outs[0] == outs[1]
    assert b"search-lower-bound" in outs[0]


def test_threads_env(tmp_path, monkeypatch):
    monkeypatch.setenv("SOLYANIK_THREADS", "3")
    out = tmp_path / "out"
    assert main(["fit", "--config", write(tmp_path, {"sweep": [["1/2", "2"], ["3/4", "3/2"]]}), "--out", str(out)]) == 0
    assert json.loads((out / "manifest.json").read_text())["threads"] == 3
    monkeypatch.setenv("SOLYANIK_THREADS", "zero")
    assert main(["fit", "--config", write(tmp_path, {"sweep": [["1/2", "2"]]}), "--out", str(tmp_path / "o2")]) == 2


def test_fit_from_sweep_csv(tmp_path):
    first = tmp_path / "sweep"
    assert main(["tauberian", "--config", write(tmp_path, SWEEP), "--out", str(first)]) == 0
    cfg = {"sweep_csv": "sweep/sweep.csv", "theory": {"kind": "strong", "setting": "discrete", "n": 1}}
    out = tmp_path / "fit"
    assert main(["fit", "--config", write(tmp_path, cfg, "fit.json"), "--out", str(out)]) == 0
    doc = json.loads((out / "fit.json").read_text())
    assert doc["theoretical_exponent"] == "1" and doc["dropped"] == 0


def test_maximal_and_ergodic(tmp_path):
    cfg = {"dim": 1, "basis": {"kind": "box", "r": 3}, "set": [[0]], "alphas": ["1/2"]}
    assert main(["maximal", "--config", write(tmp_path, cfg), "--out", str(tmp_path / "m")]) == 0
    assert (tmp_path / "m" / "field.csv").read_text().splitlines()[1] == "-2,1,3"
    cfg = {"system": {"cyclic": [5]}, "basis": {"kind": "box", "r": 5}, "set": [0],
           "alphas": ["3/10"], "tauberian": True}
    assert main(["ergodic", "--config", write(tmp_path, cfg), "--out", str(tmp_path / "e")]) == 0
    doc = json.loads((tmp_path / "e" / "ergodic.json").read_text())
    assert doc["field"] == ["1", "1/2", "1/3", "1/3", "1/2"]
    assert doc["levels"][0]["measure"] == "1" and doc["tauberian"][0]["value"] == "5"


def test_digest_tracks_content():
    assert config_digest(SWEEP) == config_digest(json.loads(json.dumps(SWEEP)))
    assert config_digest(SWEEP) != config_digest(dict(SWEEP, alphas=["1/2"]))


def test_verify_unknown_suite():
    assert main(["verify", "nothing"]) == 2


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "solyanik", "verify", "exponents", "--out", str(tmp_path)],
                          capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert json.loads((tmp_path / "verify.json").read_text())["passed"]
