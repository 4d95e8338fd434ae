import csv
import pathlib
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from curlforge.cli import RunManifest, main, manifest_path, parse_grid, UsageError


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def read_csv(path):
    with open(path) as fh:
        rows = list(csv.reader(fh))
    return rows[0], np.array(rows[1:], dtype=float)


def test_list(capsys):
    code, out, _ = run(capsys, "list")
    lines = out.strip().splitlines()
    assert code == 0 and len(lines) == 12
    names = [l.split()[0] for l in lines]
    assert names == sorted(names)
    assert any(l.startswith("contact_radial") and "gamma=" in l for l in lines)


def test_simulate_kapitsa(tmp_path, capsys):
    out = tmp_path / "k.csv"
    code, _, _ = run(capsys, "simulate", "kapitsa", "--T", "2", "--dt", "0.001", "--out", str(out))
    assert code == 0
    header, data = read_csv(out)
    assert header == ["t", "x", "y", "p_x", "p_y"]
    assert len(data) == math.ceil(2 / 0.001) + 1
    assert data[-1, 0] == 2.0
    man = RunManifest.from_json(manifest_path(out).read_text())
    assert man.system == "kapitsa" and man.params == {"a": 1.0, "b": 1.0}
    assert RunManifest.from_json(man.to_json()) == man


def test_simulate_contact_has_z(tmp_path, capsys):
    out = tmp_path / "c.csv"
    assert run(capsys, "simulate", "contact_radial", "--T", "0.1", "--out", str(out))[0] == 0
    assert read_csv(out)[0] == ["t", "x", "y", "p_x", "p_y", "z"]


def test_simulate_byte_identical(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for p in (a, b):
        run(capsys, "simulate", "gyro_curl", "--T", "1", "--param", "s=0.7", "--potential", "sine", "--out", str(p))
    assert a.read_bytes() == b.read_bytes()


def test_simulate_config_and_override(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# kapitsa run\na = 0\nb=1\nT = 1\ndt=0.01\nx0 = 1,0,0,0\n")
    out = tmp_path / "k.csv"
    assert run(capsys, "simulate", "kapitsa", "--config", str(cfg), "--param", "b=4", "--out", str(out))[0] == 0
    _, data = read_csv(out)
    assert len(data) == 101
    assert data[-1, 1] == pytest.approx(np.cos(2.0), abs=1e-7)
    assert json.loads(manifest_path(out).read_text())["params"] == {"a": 0.0, "b": 4.0}


@pytest.mark.parametrize("argv", [
    ["simulate", "kapitsa", "--dt", "0", "--out", "x.csv"],
    ["simulate", "kapitsa", "--dt", "-1", "--out", "x.csv"],
    ["simulate", "nosuch", "--out", "x.csv"],
    ["simulate", "kapitsa", "--param", "gamma=1", "--out", "x.csv"],
    ["simulate", "kapitsa", "--param", "a", "--out", "x.csv"],
    ["simulate", "kapitsa", "--x0", "1,2", "--out", "x.csv"],
    ["simulate", "kapitsa"],
    ["check", "kapitsa", "--config", "/nonexistent/file"],
    ["frobnicate"],
])
def test_usage_errors(argv, capsys, tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    code, _, err = run(capsys, *argv)
    assert code == 2
    assert err.strip()


def test_blow_up_exit_code(tmp_path, capsys):
    out = tmp_path / "b.csv"
    code, _, err = run(capsys, "simulate", "kapitsa", "--param", "a=0", "--param", "b=-1e6",
                       "--T", "10", "--dt", "0.1", "--out", str(out))
    assert code == 3 and "last finite time" in err


def test_check_radial(capsys):
    code, out, _ = run(capsys, "check", "radial_curl")
    rep = json.loads(out)
    assert code == 0 and rep["verdict"] == "pass"
    ok = {e["name"]: e["pass"] for e in rep["invariants"]}
    assert ok["energy"] and ok["angular_momentum"]


def test_check_azimuthal(capsys):
    rep = json.loads(run(capsys, "check", "azimuthal_curl")[1])
    ent = {e["name"]: e for e in rep["invariants"]}
    assert ent["energy"]["pass"]
    assert ent["angular_momentum"]["note"] == "not conserved (expected)"


def test_check_bateman_has_rate_entry(capsys, tmp_path):
    out = tmp_path / "r.json"
    code, text, _ = run(capsys, "check", "bateman_metriplectic", "--T", "3", "--out", str(out))
    assert code == 0
    assert "metriplectic_energy_rate" in {e["name"] for e in json.loads(text)["invariants"]}
    assert json.loads(out.read_text()) == json.loads(text)


def test_check_failure_exit_code(capsys):
    # Coarse steps break the 1e-7 conservation budget.
    code, out, _ = run(capsys, "check", "radial_curl", "--dt", "0.5", "--T", "10")
    assert code == 1 and json.loads(out)["verdict"] == "fail"


def test_compare_triple(capsys):
    code, out, _ = run(capsys, "compare", "bateman_metriplectic", "contact_radial", "conformal_curl",
                       "--param", "gamma=0.2")
    res = json.loads(out)
    assert code == 0 and len(res["pairs"]) == 3
    assert all(p["max_config_divergence"] <= 1e-7 for p in res["pairs"])


def test_compare_galley_kapitsa(capsys):
    code, out, _ = run(capsys, "compare", "kapitsa", "galley_forced_km", "--param", "kappa=0", "--tol", "1e-9")
    assert code == 0 and json.loads(out)["pairs"][0]["max_config_divergence"] <= 1e-9


def test_compare_negative_case(capsys):
    code, out, _ = run(capsys, "compare", "kapitsa", "azimuthal_curl")
    assert code == 1 and json.loads(out)["verdict"] == "fail"


def test_compare_usage(capsys):
    assert run(capsys, "compare", "kapitsa", "galley_bateman")[0] == 2
    assert run(capsys, "compare", "kapitsa")[0] == 2
    assert run(capsys, "compare", "kapitsa", "radial_curl", "--param", "zeta=1")[0] == 2


def test_stability_kapitsa_sweep(capsys, tmp_path):
    out = tmp_path / "s.csv"
    code, text, _ = run(capsys, "stability", "kapitsa", "--grid", "a=0,0.5,1", "--param", "b=1", "--out", str(out))
    assert code == 0 and out.read_text() == text
    rows = list(csv.DictReader(text.splitlines()))
    assert list(rows[0]) == ["a", "b", "re1", "im1", "re2", "im2", "re3", "im3", "re4", "im4",
                             "max_re", "classification"]
    assert [float(r["max_re"]) <= 1e-9 for r in rows] == [True, False, False]


def test_stability_thomson_tait_rows(capsys):
    code, text, _ = run(capsys, "stability", "gyro_dissipative_km", "--param", "a=0", "--param", "b=1",
                        "--param", "s=0", "--grid", "c=0,0.01", "--workers", "2")
    rows = list(csv.DictReader(text.splitlines()))
    assert code == 0
    assert [r["classification"] for r in rows] == ["stable-center", "unstable"]


def test_stability_workers_do_not_change_output(capsys):
    a = run(capsys, "stability", "gyro_dissipative_km", "--grid", "a=0,1", "--grid", "s=0,1,2", "--workers", "1")[1]
    b = run(capsys, "stability", "gyro_dissipative_km", "--grid", "a=0,1", "--grid", "s=0,1,2", "--workers", "4")[1]
    assert a == b and len(a.splitlines()) == 7


def test_stability_usage(capsys):
    assert run(capsys, "stability", "kapitsa")[0] == 2
    assert run(capsys, "stability", "kapitsa", "--grid", "a=")[0] == 2
    assert run(capsys, "stability", "radial_curl", "--grid", "a=1")[0] == 2
    assert run(capsys, "stability", "kapitsa", "--grid", "q=1")[0] == 2
    with pytest.raises(UsageError):
        parse_grid([])


def test_module_entry_point(tmp_path):
    res = subprocess.run([sys.executable, "-m", "curlforge", "list"], capture_output=True, text=True, check=False)
    assert res.returncode == 0 and "kapitsa" in res.stdout


@pytest.mark.parametrize("script,args,expect", [
    ("bateman_equivalence.py", ["--T", "1"], "max config divergence"),
    ("kapitsa_stability.py", ["--n", "3"], "stable-center"),
])
def test_scripts_run(script, args, expect):
    path = pathlib.Path(__file__).resolve().parents[1] / "scripts" / script
    res = subprocess.run([sys.executable, str(path), *args], capture_output=True, text=True, check=False)
    assert res.returncode == 0, res.stderr
    assert expect in res.stdout
