import csv
import io
import json

import numpy as np
import pytest

from isofk.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def table(text):
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    return list(csv.DictReader(io.StringIO("\n".join(lines))))


def test_weights_isotropic(capsys):
    code, out, _ = run(capsys, "weights", "--lattice", "square", "--alpha", "1.5707963", "--radians",
                       "--q", "9", "--beta", "1")
    assert code == 0
    rows = table(out)
    assert rows and all(abs(float(r["p"]) - 0.75) < 1e-7 for r in rows)
    code, out, _ = run(capsys, "weights", "--lattice", "square", "--alpha", "90", "--q", "9", "--beta", "1")
    assert all(abs(float(r["p"]) - 0.75) < 1e-12 for r in table(out))
    assert all(abs(float(r["p_dual"]) - 0.75) < 1e-12 for r in table(out))
    assert out.startswith("# manifest:")


def test_check_identities_square3x3(capsys):
    code, out, _ = run(capsys, "check-identities", "--domain", "square3x3", "--q", "9", "--beta", "0.5")
    assert code == 0
    rep = json.loads(out)
    assert rep["pass"] and all(r["pass"] for r in rep["results"])
    keys = {"identity", "domain", "beta", "q", "residual", "bound", "pass"}
    assert all(keys <= set(r) for r in rep["results"])


def test_check_identities_reports_failure(capsys):
    # an impossible tolerance makes the battery fail
    code, out, _ = run(capsys, "check-identities", "--domain", "square2x2", "--a", "1", "--b", "5",
                       "--q", "9", "--beta", "0.5", "--tol", "1e-30")
    assert code == 1
    assert not json.loads(out)["pass"]


def test_lattice_regeneration(tmp_path, capsys):
    out = tmp_path / "g.json"
    args = ["lattice", "gen", "--type", "triangular", "--angles", "60,60,60", "--n", "4", "--out", str(out)]
    assert main(args) == 0
    first = out.read_bytes()
    assert main(args) == 0
    assert out.read_bytes() == first
    from isofk.geometry import IsoradialGraph
    assert IsoradialGraph.from_json(first.decode()).to_json().encode() == first
    man = json.loads((tmp_path / "g.json.manifest.json").read_text())
    assert man["command"] == "lattice"
    code, rep, _ = run(capsys, "lattice", "check", "--graph", str(out), "--theta-min", "30")
    assert code == 0 and json.loads(rep)["bap"]["pass"]


def test_lattice_bap_failure(capsys):
    code, _, _ = run(capsys, "lattice", "check", "--type", "square", "--alpha", "15", "--n", "2",
                     "--theta-min", "30")
    assert code == 1


def test_invalid_input_exit_codes(capsys):
    assert run(capsys, "no-such-command")[0] == 2
    assert run(capsys, "weights", "--q", "9", "--bogus")[0] == 2
    assert run(capsys, "weights", "--q", "3")[0] == 2
    assert run(capsys, "lattice", "gen", "--type", "triangular", "--angles", "60,60,61")[0] == 2
    assert run(capsys, "check-identities", "--domain", "nowhere", "--q", "9", "--beta", "0.5")[0] == 2
    assert run(capsys, "lattice", "check", "--graph", "/nonexistent.json")[0] == 2


def test_enumerate_and_observable(capsys):
    code, out, _ = run(capsys, "enumerate", "--lattice", "square", "--n", "2", "--q", "9", "--beta", "1",
                       "--two-point", "0,8")
    assert code == 0
    rep = json.loads(out)
    assert rep["n_configs"] == 4096 and 0 < rep["two_point"] < 1
    code, out, _ = run(capsys, "observable", "--domain", "hexagonal2", "--q", "9", "--beta", "1")
    assert code == 0
    rows = table(out)
    assert all(float(r["F"]) >= 0 for r in rows)


def test_sample_deterministic(capsys):
    args = ("sample", "--n", "6", "--q", "9", "--beta", "1", "--sweeps", "400", "--seed", "3")
    code, a, _ = run(capsys, *args)
    _, b, _ = run(capsys, *args)
    assert code == 0 and a == b
    assert "# seed: 3" in a and "PCG64" in a


def test_decay_and_scan(capsys):
    code, out, _ = run(capsys, "decay", "--n", "12", "--q", "9", "--beta", "0.8", "--sweeps", "500",
                       "--radii", "1:4")
    assert code == 0 and "# slope:" in out
    code, out, _ = run(capsys, "decay", "--n", "10", "--q", "9", "--beta", "0.2", "--sweeps", "200",
                       "--radii", "1,8")
    assert code == 1 and "censored: True" in out
    code, out, _ = run(capsys, "critical-scan", "--n", "6", "--q", "9", "--betas", "0.7,1.4",
                       "--sweeps", "200", "--threads", "2")
    assert code == 0 and "crossing_region" in out
    assert len(table(out)) == 2


def test_threads_env(monkeypatch, capsys):
    monkeypatch.setenv("ISOFK_THREADS", "0")
    code, _, err = run(capsys, "critical-scan", "--n", "4", "--q", "9", "--betas", "0.7,1.4", "--sweeps", "100")
    assert code == 2 and "threads" in err
