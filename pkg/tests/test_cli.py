import subprocess
import sys

import numpy as np
import pytest

from timokv.cli import ConfigError, load_config, main


def write(tmp_path, text, name="cfg.yaml"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def read_table(path):
    lines = [ln for ln in open(path).read().splitlines() if ln and not ln.startswith("#")]
    return lines[0].split(","), [ln.split(",") for ln in lines[1:]]


def test_simulate_conservative_flat(tmp_path):
    cfg = write(tmp_path, "damping: {kind: zero}\nn_cells: 40\nsimulate: {t_final: 20, dt: 0.05, stride: 4}\n")
    out = tmp_path / "e.csv"
    assert main(["simulate", "--config", cfg, "--out", str(out)]) == 0
    head, rows = read_table(out)
    assert head[:2] == ["t", "E"]
    e = np.array([float(r[1]) for r in rows])
    assert np.abs(e - e[0]).max() <= 1e-10 * e[0]
    footer = [ln for ln in out.read_text().splitlines() if ln.startswith("# fit")][0]
    p = float(footer.split("p=")[1].split()[0].rstrip(","))
    assert abs(p) < 1e-6


def test_simulate_is_deterministic(tmp_path):
    cfg = write(tmp_path, "n_cells: 40\nsimulate: {t_final: 5, dt: 0.05}\n")
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["simulate", "--config", cfg, "--out", str(a)]) == 0
    assert main(["simulate", "--config", cfg, "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_spectrum_and_empty_range(tmp_path):
    cfg = write(tmp_path, "spectrum: {c: 1.0, n_lo: 50, n_hi: 52}\n")
    out = tmp_path / "s.csv"
    assert main(["spectrum", "--config", cfg, "--out", str(out)]) == 0
    _, rows = read_table(out)
    assert len(rows) == 6  # both branches by default
    assert all(r[-1] == "ok" for r in rows)
    cfg = write(tmp_path, "spectrum: {c: 1.0, n_lo: 5, n_hi: 4}\n", "e.yaml")
    assert main(["spectrum", "--config", cfg, "--out", str(out)]) == 0
    _, rows = read_table(out)
    assert rows == []


@pytest.mark.parametrize("text,needle", [("beam: {rho1: -1}\n", "rho1"),
                                          ("beam: {rho1: 1\n  x: [\n", "line"),
                                          ("foo: 1\n", "foo")])
def test_config_errors(tmp_path, capsys, text, needle):
    cfg = write(tmp_path, text)
    assert main(["simulate", "--config", cfg]) == 2
    assert needle in capsys.readouterr().err


def test_env_override():
    cfg = load_config(None, {"TIMOKV_N_CELLS": "320", "TIMOKV_DAMPING__KIND": "global",
                             "TIMOKV_RESOLVENT__N_HI": "40"})
    assert cfg.n_cells == 320 and cfg.damping.kind == "global" and cfg.resolvent.n_hi == 40
    with pytest.raises(ConfigError):
        load_config(None, {"TIMOKV_N_CELLS": "many"})


def test_resolvent_global_slope(tmp_path, monkeypatch):
    monkeypatch.setenv("TIMOKV_DAMPING__KIND", "global")
    monkeypatch.setenv("TIMOKV_N_CELLS", "320")
    monkeypatch.setenv("TIMOKV_RESOLVENT__N_HI", "40")
    out = tmp_path / "r.csv"
    assert main(["resolvent", "--out", str(out)]) == 0
    line = [ln for ln in out.read_text().splitlines() if "slope" in ln][0]
    slope = float(line.split(":")[1])
    assert slope == pytest.approx(2.0, abs=0.1)


def test_verify_not_applicable(tmp_path, capsys):
    cfg = write(tmp_path, "damping: {kind: zero}\nverify: {suites: [decay]}\n")
    out = tmp_path / "v.csv"
    assert main(["verify", "--config", cfg, "--out", str(out)]) == 0
    assert "not-applicable (H violated)" in out.read_text()


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "timokv", "--help"], capture_output=True, text=True)
    assert r.returncode == 0 and "simulate" in r.stdout
