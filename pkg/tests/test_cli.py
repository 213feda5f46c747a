import csv
import json
import math
from pathlib import Path

import numpy as np
import pytest

from autoion.cli import ConfigError, load_config, run
from autoion.presets import PRESETS, preset

CONFIGS = Path(__file__).resolve().parents[1] / "configs"
V0 = 1 / math.sqrt(math.pi)


def _write(tmp_path, doc, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc), encoding="utf-8")
    return path


def _csv(path):
    with open(path, encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    return rows[0], np.array(rows[1:], dtype=float)


def _run(tmp_path, doc, mode, *extra, name="out"):
    cfg = _write(tmp_path, doc, f"{name}.json")
    out = tmp_path / name
    code = run([mode, "--config", str(cfg), "--out", str(out), *extra])
    return code, out


@pytest.mark.parametrize("name", sorted(PRESETS))
def test_shipped_configs_match_presets(name):
    assert json.loads((CONFIGS / f"{name}.json").read_text()) == preset(name)


def test_unknown_preset():
    with pytest.raises(KeyError):
        preset("fig7")


def test_config_errors(tmp_path, capsys):
    bad = [
        {"mode": "spectrum"},
        {"physical": {"E_a": 1.0}, "reduced": {"q_a": 1}},
        {"reduced": {"q_a": 1.0, "q_b": 1.0, "gamma_a": 1.0, "gamma_b": 1.0}},
        {"reduced": {**preset("fig2b")["reduced"], "gamma_a": -1.0}},
        {"physical": {"E_a": 1.0, "bogus": 2}},
        {**preset("fig2b"), "grid": {"E_min": 2.0, "E_max": 1.0}},
        {**preset("fig2b"), "workflow": {"times": [1.0]}},
    ]
    for i, doc in enumerate(bad):
        code, _ = _run(tmp_path, doc, "spectrum", name=f"bad{i}")
        assert code == 2, doc
    assert "config error" in capsys.readouterr().err
    missing = run(["spectrum", "--config", str(tmp_path / "nope.json")])
    assert missing == 2


def test_wrong_mode_is_config_error(tmp_path):
    with pytest.raises(ConfigError):
        load_config(_write(tmp_path, preset("fig6")), "spectrum")


def test_resonant_zero_pump_is_numerical_error(tmp_path, capsys):
    doc = {"reduced": {**preset("fig2b")["reduced"], "Omega": 0.0}}
    code, _ = _run(tmp_path, doc, "spectrum")
    assert code == 3
    assert "DegenerateRabi" in capsys.readouterr().err


def test_spectrum_normalization_and_defaults(tmp_path):
    doc = preset("fig2a")
    doc["workflow"] = {}
    code, out = _run(tmp_path, doc, "spectrum")
    assert code == 0
    header, data = _csv(out / "spectrum.csv")
    assert header == ["E", "I_lt", "I_st_0", "I_st_1", "I_osc", "phi"]
    assert np.trapezoid(data[:, 1], data[:, 0]) == pytest.approx(1.0, abs=1e-6)
    meta = json.loads((out / "spectrum.json").read_text())["metadata"]
    grid = meta["config"]["grid"]
    assert grid["n_points"] == 2001 and grid["E_min"] == pytest.approx(-9.0) and grid["E_max"] == pytest.approx(11.0)
    assert "tolerances" in meta and meta["version"]
    poles = json.loads((out / "spectrum.json").read_text())["payload"]["runs"][0]["poles"]
    assert len(poles) == 8


def test_spectrum_preset_writes_one_table_per_omega(tmp_path):
    code, out = _run(tmp_path, preset("fig4b"), "spectrum", "--format", "csv")
    assert code == 0
    assert sorted(p.name for p in out.iterdir()) == [
        "spectrum.meta.json",
        "spectrum_000.csv",
        "spectrum_001.csv",
        "spectrum_002.csv",
    ]


def test_evolve_long_time_and_zero_time(tmp_path):
    doc = preset("fig6")
    doc["workflow"]["times"] = [0.0, 5.0, "inf"]
    code, out = _run(tmp_path, doc, "evolve", name="ev")
    assert code == 0
    header, data = _csv(out / "evolve.csv")
    assert header == ["E", "I_t=0", "I_t=5", "I_t=inf"]
    assert np.all(data[:, 1] == 0)
    spec = {"reduced": doc["reduced"], "workflow": {}}
    code, sout = _run(tmp_path, spec, "spectrum", name="sp")
    _, sdata = _csv(sout / "spectrum.csv")
    assert np.max(np.abs(data[:, 3] - sdata[:, 1])) <= 1e-10


def test_evolve_with_oracle(tmp_path):
    code, out = _run(tmp_path, preset("fig6"), "evolve", "--oracle")
    assert code == 0
    report = json.loads((out / "evolve.json").read_text())["payload"]["oracle"]
    assert [r["t"] for r in report["errors"]] == [1.0, 5.0, 10.0]
    assert all(r["rel_l2"] < 0.05 for r in report["errors"])
    assert report["max_norm_drift"] <= 1e-6
    header, _ = _csv(out / "oracle.csv")
    assert header[:3] == ["E", "oracle_t=1", "analytic_t=1"]


def test_zeros_exact_fano(tmp_path):
    doc = {
        "physical": {"E_a": 1.0, "E_b": 1.0, "E_L": 1.0, "mu_a": 0.4, "mu_b": 0.5, "mu": 1.0,
                     "J": 0.3, "V": V0, "J_ab": 0.15},
        "workflow": {"omegas": [0.5, 2.0]},
    }
    code, out = _run(tmp_path, doc, "zeros")
    assert code == 0
    runs = json.loads((out / "zeros.json").read_text())["payload"]["runs"]
    for r in runs:
        exact = [z for z in r["zeros"] if z["kind"] == "exact"]
        assert len(exact) == 1
        # gamma_b = pi V^2 = 1 and q_b = mu_b / (pi mu V)
        assert exact[0]["E"] == pytest.approx(1.0 - 0.5 / (math.pi * V0), abs=1e-9)


def test_zeros_weak_pump_and_resonant_channels(tmp_path):
    doc = {"reduced": {**preset("fig2b")["reduced"], "Omega": 0.005}}
    code, out = _run(tmp_path, doc, "zeros")
    assert code == 0
    zs = json.loads((out / "zeros.json").read_text())["payload"]["runs"][0]["zeros"]
    assert sorted(z["E"] for z in zs if z["kind"] == "weak-pump") == pytest.approx([-1.0, 1.0], abs=1e-12)
    c0 = sorted(z["E"] for z in zs if z["kind"] == "dynamical" and z["channel"] == 0)
    c1 = sorted(z["E"] for z in zs if z["kind"] == "dynamical" and z["channel"] == 1)
    assert len(c0) == len(c1) > 0
    assert np.max(np.abs(np.subtract(c0, c1))) <= 1e-8


def test_sweep_symmetric_range(tmp_path):
    doc = {"reduced": preset("fig8b")["reduced"], "workflow": {"omega_range": [-2.0, 2.0], "omega_count": 11}}
    code, out = _run(tmp_path, doc, "sweep")
    assert code == 0
    _, pts = _csv(out / "sweep.csv")
    for om in np.linspace(0.4, 2.0, 5):
        for k in (0, 1):
            a = np.sort(pts[np.isclose(pts[:, 0], om) & (pts[:, 2] == k), 3])
            b = np.sort(pts[np.isclose(pts[:, 0], -om) & (pts[:, 2] == k), 3])
            assert a.size == b.size > 0 and np.allclose(a, b, atol=1e-8)
    # Omega = 0 is in the grid and fails; 10 of 11 points still clear the threshold
    payload = json.loads((out / "sweep.json").read_text())["payload"]
    assert len(payload["failures"]) == 1


def test_sweep_below_success_threshold(tmp_path):
    doc = {"reduced": preset("fig8b")["reduced"], "workflow": {"omega_range": [-1.0, 1.0], "omega_count": 3}}
    code, out = _run(tmp_path, doc, "sweep")
    assert code == 3
    assert (out / "sweep.csv").exists()


def test_fig8b_preset_events(tmp_path):
    doc = preset("fig8b")
    doc["workflow"].update({"omega_range": [0.3, 1.5], "omega_count": 49})
    code, out = _run(tmp_path, doc, "sweep", "--threads", "2")
    assert code == 0
    header, ev = _csv(out / "events.csv")
    assert header[-1] == "change"
    assert ev.shape[0] > 0 and np.all(ev[:, -1] % 2 == 0)


def test_fig9_preset_branches(tmp_path):
    doc = preset("fig9")
    doc["workflow"].update({"omega_range": [0.001, 0.003], "omega_count": 3, "channels": [0]})
    code, out = _run(tmp_path, doc, "sweep")
    assert code == 0
    _, pts = _csv(out / "sweep.csv")
    first = pts[pts[:, 0] == 0.001, 3]
    assert np.sum(np.abs(first) < 1e-3) == 5


def test_payload_is_deterministic(tmp_path):
    doc = {"reduced": preset("fig2b")["reduced"], "workflow": {"omegas": [0.5, 1.0, 2.0]}}
    a = json.loads(_run(tmp_path, doc, "zeros", name="a")[1].joinpath("zeros.json").read_text())
    b = json.loads(_run(tmp_path, doc, "zeros", "--threads", "3", name="b")[1].joinpath("zeros.json").read_text())
    assert a["payload"] == b["payload"]
    assert (tmp_path / "a" / "zeros.csv").read_bytes() == (tmp_path / "b" / "zeros.csv").read_bytes()


def test_echoed_config_reproduces_payload(tmp_path):
    code, out = _run(tmp_path, preset("fig2b"), "spectrum", name="first")
    first = json.loads((out / "spectrum.json").read_text())
    echo = first["metadata"]["config"]
    echo["output"]["dir"] = str(tmp_path / "second")
    code, out2 = _run(tmp_path, echo, "spectrum", name="second")
    assert code == 0
    assert json.loads((out2 / "spectrum.json").read_text())["payload"] == first["payload"]
