import json
import os
import subprocess
import sys

import numpy as np
import pytest

from delaunay4.cli import RunConfig, a_grid, main, parse_a, resolve_threads
from delaunay4.errors import ValidationError
from delaunay4.io import format_value, read_samples, render_csv, write_samples
from delaunay4.profiles import theta_grid

A0 = 0.8357835878132627


def run(args, capsys):
    code = main(args)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_parse_a():
    assert parse_a("0.6a0", A0) == pytest.approx(0.6 * A0)
    assert parse_a("a0", A0) == A0
    assert parse_a("0.5", A0) == 0.5
    with pytest.raises(ValidationError):
        parse_a("x", A0)


def test_a_grid():
    cfg = RunConfig(a_min="0.3a0", a_max="0.9a0", a_count=4, spacing="log")
    g = a_grid(cfg, A0)
    assert len(g) == 4 and g[0] == pytest.approx(0.3 * A0) and g[-1] == pytest.approx(0.9 * A0)
    with pytest.raises(ValidationError):
        a_grid(RunConfig(a_values=["1.1a0"]), A0)
    with pytest.raises(ValidationError):
        a_grid(RunConfig(a_min="0.9a0", a_max="0.3a0"), A0)


def test_threads_env(monkeypatch):
    monkeypatch.delenv("DELAUNAY4_THREADS", raising=False)
    assert resolve_threads(3) == 3
    assert resolve_threads(0) >= 1
    monkeypatch.setenv("DELAUNAY4_THREADS", "2")
    assert resolve_threads(7) == 2
    monkeypatch.setenv("DELAUNAY4_THREADS", "many")
    with pytest.raises(ValidationError):
        resolve_threads(1)


def test_format_value():
    assert format_value(-0.0) == "0"
    assert format_value(0.1) == "0.10000000000000001"
    assert format_value(True) == "true"
    assert format_value(float("nan")) == "nan"
    assert render_csv([]) == ""
    assert render_csv([{"a": 1}, {"a": 2, "b": 3.5}]) == "a,b\n1,\n2,3.5\n"


def test_samples_round_trip(tmp_path):
    t = np.linspace(0, 1, 5)
    th = theta_grid(5, 1)
    V = np.random.default_rng(0).normal(size=(5, len(th)))
    path = str(tmp_path / "s.csv")
    write_samples(path, t, th, V, {"k": 1})
    t2, th2, V2, meta = read_samples(path)
    assert np.array_equal(t, t2) and np.array_equal(th, th2) and np.array_equal(V, V2)
    assert meta == {"k": 1}


def test_constants_json(capsys):
    code, out, _ = run(["constants", "--n", "5", "--format", "json"], capsys)
    assert code == 0
    doc = json.loads(out)
    assert doc["meta"]["command"] == "constants" and doc["meta"]["n"] == 5
    assert "threads" not in doc["meta"]
    row = {r["name"]: r["value"] for r in doc["rows"]} if "name" in doc["rows"][0] else doc["rows"][0]
    assert row["a0"] == pytest.approx(A0, rel=1e-15)


def test_exit_usage(capsys):
    assert run(["orbits", "--a", "2.0"], capsys)[0] == 2
    assert run(["constants", "--n", "4"], capsys)[0] == 2
    assert run(["nonsense"], capsys)[0] == 2
    assert run(["profile", "--kind", "fowler"], capsys)[0] == 2  # no --output


def test_exit_io(tmp_path, capsys):
    code, _, err = run(["fit", str(tmp_path / "missing.csv")], capsys)
    assert code == 3 and "I/O" in err
    code, *_ = run(["constants", "--output", str(tmp_path / "no" / "dir.csv")], capsys)
    assert code == 3


def test_exit_numerical(tmp_path, capsys):
    t = np.linspace(0, 30, 100)
    th = theta_grid(5, 1)
    path = str(tmp_path / "c.csv")
    write_samples(path, t, th, np.full((100, len(th)), 2.0), {})
    code, out, err = run(["fit", path], capsys)
    assert code == 4 and "EnergyOutOfRange" in err and out == ""


def test_indicial_and_orbits(capsys):
    code, out, _ = run(["indicial", "--case", "spherical", "--j", "0", "1"], capsys)
    assert code == 0 and len(out.strip().splitlines()) == 3
    code, out, _ = run(["orbits", "--a", "0.6a0", "a0"], capsys)
    assert code == 0
    lines = out.strip().splitlines()
    assert len(lines) == 3 and "status" in lines[0]


def test_profile_fit_pipeline(tmp_path, capsys):
    path = str(tmp_path / "s.csv")
    code, *_ = run(["profile", "--kind", "deformed", "--a", "0.6a0", "--x0", "0.1",
                    "--t-max", "21.6", "--t-count", "1400", "--output", path], capsys)
    assert code == 0 and os.path.exists(path + ".json")
    code, out, _ = run(["fit", path, "--window", "2", "12", "--format", "json"], capsys)
    assert code == 0
    row = json.loads(out)["rows"][0]
    assert row["a_hat"] == pytest.approx(0.6 * A0, abs=1e-6)
    assert row["x0_hat0"] == pytest.approx(0.1, abs=1e-6)
    assert row["beta1"] > row["beta0"]


def test_module_entry_point_deterministic():
    cmd = [sys.executable, "-m", "delaunay4", "spectrum", "--a", "0.6a0", "--j", "1"]
    a = subprocess.run(cmd, capture_output=True, check=True).stdout
    b = subprocess.run(cmd, capture_output=True, check=True).stdout
    assert a == b and a.count(b"\n") == 2
