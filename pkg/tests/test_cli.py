import csv
import hashlib
import json
import subprocess
import sys
import time

import numpy as np
import pytest

from conftest import arfima0d0
from fhurst.bench import shipped_config_path
from fhurst.cli import main
from fhurst.fts import read_curve_csv

IDS = ["aggvar", "diffvar", "absval", "higuchi", "peng", "rs", "rar", "per", "boxper", "gph", "sgph",
       "wavelet", "lw", "lwt", "lwm", "elw", "elw2"]


def digest(path):
    return hashlib.sha256(path.read_bytes()).hexdigest()


@pytest.fixture(scope="module")
def panel(tmp_path_factory):
    out = tmp_path_factory.mktemp("sim") / "panel.csv"
    assert main(["simulate", "--case", "1", "--strength", "moderate", "--d", "0.2", "--n", "300",
                 "--grid-points", "21", "--seed", "3", "--out", str(out)]) == 0
    return out


# --- simulate -----------------------------------------------------------------------


def test_simulate_shape_and_sidecar(panel):
    fs = read_curve_csv(panel)
    assert fs.values.shape == (300, 21)
    meta = json.loads(panel.with_suffix(".json").read_text())
    assert meta["d"] == 0.2 and meta["seed"] == 3 and meta["n"] == 300
    assert meta["model"] == {"case": 1, "strength": "moderate"}


def test_simulate_reproducible(tmp_path, panel):
    again = tmp_path / "again.csv"
    main(["simulate", "--case", "1", "--strength", "moderate", "--d", "0.2", "--n", "300",
          "--grid-points", "21", "--seed", "3", "--out", str(again)])
    assert digest(again) == digest(panel)
    assert again.with_suffix(".json").read_text() == panel.with_suffix(".json").read_text()


@pytest.mark.parametrize("d", ["0.6", "-0.5", "0.5", "abc"])
def test_simulate_rejects_nonstationary_d(tmp_path, capsys, d):
    with pytest.raises(SystemExit) as info:
        main(["simulate", "--case", "1", "--strength", "weak", "--d", d, "--n", "50", "--out", str(tmp_path / "x.csv")])
    assert info.value.code == 2
    if d != "abc":
        assert "(-1/2, 1/2)" in capsys.readouterr().err
    assert not (tmp_path / "x.csv").exists()


def test_simulate_rejects_short_series(tmp_path):
    with pytest.raises(SystemExit) as info:
        main(["simulate", "--case", "2", "--strength", "weak", "--d", "0.1", "--n", "5", "--out", str(tmp_path / "x.csv")])
    assert info.value.code == 2


# --- estimate --------------------------------------------------------------------------


def test_estimate_scalar_iid(tmp_path, capsys):
    x = np.random.default_rng(8).standard_normal(2048)
    path = tmp_path / "iid.csv"
    path.write_text("x\n" + "\n".join(repr(float(v)) for v in x) + "\n")
    assert main(["estimate", str(path), "--estimators", "gph", "--format", "json"]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["pipeline"]["input"] == "scalar"
    (est,) = payload["estimates"]
    assert est["method"] == "gph" and abs(est["d"]) < 0.15


def test_estimate_all_table(panel, capsys):
    assert main(["estimate", str(panel), "--estimators", "all"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 18
    assert [ln.split()[0] for ln in lines[1:]] == IDS
    for ln in lines[1:]:
        h = float(ln.split()[1])
        assert 0 < h < 1.2


def test_estimate_plugin_reports_bandwidth(panel, tmp_path, capsys):
    out = tmp_path / "est.json"
    assert main(["estimate", str(panel), "--estimators", "lw", "--lrc", "kernel_plugin", "--out", str(out)]) == 0
    assert "h_opt" in capsys.readouterr().err
    payload = json.loads(out.read_text())
    assert payload["pipeline"]["h_opt"] > 0
    assert payload["pipeline"]["lrc_method"] == "kernel_plugin"


def test_estimate_unknown_id(panel, capsys):
    assert main(["estimate", str(panel), "--estimators", "lw,bogus"]) == 2
    err = capsys.readouterr().err
    assert "bogus" in err and "lw" in err and "elw2" in err


def test_estimate_missing_file(tmp_path):
    assert main(["estimate", str(tmp_path / "none.csv")]) == 2


def test_estimate_partial_failure_exit_zero(tmp_path, capsys):
    # 40 points is too short for the wavelet pyramid but fine for lw
    path = tmp_path / "short.csv"
    path.write_text("\n".join(repr(float(v)) for v in np.random.default_rng(1).standard_normal(40)) + "\n")
    code = main(["estimate", str(path), "--estimators", "lw,wavelet", "--format", "json"])
    payload = json.loads(capsys.readouterr().out)
    by_id = {e["method"]: e for e in payload["estimates"]}
    assert by_id["lw"]["d"] is not None
    if by_id["wavelet"]["d"] is None:
        assert "error" in by_id["wavelet"]
    assert code == 0


def test_estimate_all_failed_exit_one(tmp_path):
    path = tmp_path / "tiny.csv"
    path.write_text("1\n2\n3\n4\n")
    assert main(["estimate", str(path), "--estimators", "wavelet"]) == 1


def test_estimate_does_not_modify_input(panel):
    before = digest(panel)
    main(["estimate", str(panel), "--estimators", "gph"])
    assert digest(panel) == before


def test_list_estimators(capsys):
    assert main(["list-estimators"]) == 0
    assert [ln.split()[0] for ln in capsys.readouterr().out.splitlines()] == IDS


# --- bench --------------------------------------------------------------------------------


def small_config(tmp_path):
    cfg = {"models": [{"case": 1, "strength": "moderate"}], "d_values": [0.1, 0.3], "n_values": [128],
           "B": 3, "estimators": ["lw", "peng"], "grid_points": 21, "seed": 9}
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    return path


def test_bench_outputs(tmp_path):
    cfg = small_config(tmp_path)
    before = digest(cfg)
    out = tmp_path / "run"
    start = time.perf_counter()
    assert main(["bench", "--config", str(cfg), "--out", str(out)]) == 0
    assert time.perf_counter() - start < 60
    assert digest(cfg) == before
    for name in ("report.csv", "report.json", "plot_data.csv", "run_info.json", "mse_case1-moderate.png"):
        assert (out / name).exists()
    rows = list(csv.DictReader((out / "report.csv").open()))
    assert len(rows) == 6
    for r in rows:
        assert float(r["mse_x100"]) == 100 * float(r["mse"])
    payload = json.loads((out / "report.json").read_text())
    assert len(payload["cells"]) == 4 and len(payload["overall"]) == 2
    assert json.loads((out / "run_info.json").read_text())["wall_time_seconds"] > 0


def test_bench_byte_identical_rerun(tmp_path):
    cfg = small_config(tmp_path)
    main(["bench", "--config", str(cfg), "--out", str(tmp_path / "a"), "--format", "json"])
    main(["bench", "--config", str(cfg), "--out", str(tmp_path / "b"), "--format", "json", "--parallelism", "3"])
    assert (tmp_path / "a" / "report.json").read_bytes() == (tmp_path / "b" / "report.json").read_bytes()
    assert not (tmp_path / "a" / "report.csv").exists()


def test_bench_seed_override(tmp_path):
    cfg = small_config(tmp_path)
    main(["bench", "--config", str(cfg), "--out", str(tmp_path / "a"), "--format", "json"])
    main(["bench", "--config", str(cfg), "--out", str(tmp_path / "b"), "--format", "json", "--seed", "10"])
    a = json.loads((tmp_path / "a" / "report.json").read_text())
    b = json.loads((tmp_path / "b" / "report.json").read_text())
    assert b["metadata"]["seed"] == 10 and a["cells"] != b["cells"]


@pytest.mark.parametrize("raw,field", [
    ({"models": [{"case": 7, "strength": "weak"}]}, "models[0].case"),
    ({"estimators": ["lw", "xyz"]}, "estimators[1]"),
    ({"B": 0}, "B"),
])
def test_bench_malformed_config(tmp_path, capsys, raw, field):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(raw))
    assert main(["bench", "--config", str(path), "--out", str(tmp_path / "o")]) == 2
    assert f"config error at {field}" in capsys.readouterr().err


def test_bench_shipped_smoke(tmp_path):
    assert main(["bench", "--config", str(shipped_config_path("smoke")), "--out", str(tmp_path)]) == 0


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "fhurst", "list-estimators"], capture_output=True, text=True)
    assert proc.returncode == 0 and "elw2" in proc.stdout
    proc = subprocess.run([sys.executable, "-m", "fhurst", "simulate", "--case", "1", "--strength", "weak",
                           "--d", "0.7", "--n", "50", "--out", str(tmp_path / "x.csv")], capture_output=True, text=True)
    assert proc.returncode == 2


def test_estimate_scalar_long_memory(tmp_path, capsys):
    x = arfima0d0(0.3, 4096, np.random.default_rng(4))
    path = tmp_path / "lm.csv"
    path.write_text("\n".join(repr(float(v)) for v in x) + "\n")
    assert main(["estimate", str(path), "--estimators", "lw", "--format", "json"]) == 0
    (est,) = json.loads(capsys.readouterr().out)["estimates"]
    assert abs(est["d"] - 0.3) < 0.1
