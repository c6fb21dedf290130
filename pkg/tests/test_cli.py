import json
from pathlib import Path

import pytest

from dmkr.cli import main


def run_cli(args):
    return main(args)


def read(path):
    return Path(path).read_bytes()


def test_selftest_passes(tmp_path, capsys):
    assert run_cli(["selftest", "--out", str(tmp_path)]) == 0
    out = capsys.readouterr().out
    assert "[pass]" in out and "FAIL" not in out
    assert (tmp_path / "selftest" / "selftest.csv").exists()
    assert (tmp_path / "selftest" / "run.json").exists()


def test_otoc_outputs_and_bit_reproducibility(tmp_path):
    args = ["otoc", "--K", "3.0", "--hbar", "0.25", "--N", "64", "--T", "6",
            "--format", "csv,svg,json"]
    assert run_cli(args + ["--out", str(tmp_path / "a")]) == 0
    assert run_cli(args + ["--out", str(tmp_path / "b")]) == 0
    for name in ("otoc/otoc.csv", "otoc/otoc.svg", "otoc/otoc.json"):
        assert read(tmp_path / "a" / name) == read(tmp_path / "b" / name)
    side_a = json.loads((tmp_path / "a" / "otoc" / "run.json").read_text())
    side_b = json.loads((tmp_path / "b" / "otoc" / "run.json").read_text())
    side_a["config"].pop("out")
    side_b["config"].pop("out")
    assert side_a == side_b
    text = (tmp_path / "a" / "otoc" / "otoc.csv").read_text()
    assert text.startswith("# schema_version=")
    assert "t,value" in text
    assert text.endswith("\n") and "\r" not in text


def test_otoc_sidecar_records_config(tmp_path):
    run_cli(["otoc", "--K", "3.0", "--hbar", "0.25", "--N", "64", "--T", "4",
             "--out", str(tmp_path)])
    sidecar = json.loads((tmp_path / "otoc" / "run.json").read_text())
    assert sidecar["config"]["K"] == 3.0
    assert sidecar["config"]["N"] == 64
    assert sidecar["kernel_backend"] in ("compiled", "python")
    assert "otoc.csv" in sidecar["artifacts"]


def test_bifurcation_command(tmp_path):
    assert run_cli(["bifurcation", "--grid", "1:3:1", "--t-transient", "100",
                    "--t-record", "8", "--n-ics", "4", "--format", "csv,svg",
                    "--out", str(tmp_path)]) == 0
    text = (tmp_path / "bifurcation" / "bifurcation.csv").read_text()
    assert text.splitlines()[-1].count(",") == 1
    assert (tmp_path / "bifurcation" / "bifurcation.svg").exists()


def test_husimi_command(tmp_path):
    assert run_cli(["husimi", "--N", "64", "--hbar", "0.25", "--times", "1,3",
                    "--husimi-grid", "24", "--format", "csv,svg",
                    "--out", str(tmp_path)]) == 0
    assert (tmp_path / "husimi" / "husimi_t0001.csv").exists()
    assert (tmp_path / "husimi" / "husimi_t0003.svg").exists()


def test_spectra_command(tmp_path):
    assert run_cli(["spectra", "--K", "2.0", "--N", "64", "--hbar", "0.25",
                    "--n-eigs", "6", "--samples-per-cell", "60",
                    "--cell-side", "0.4", "--dump-density", "--dump-matrix",
                    "--out", str(tmp_path)]) == 0
    qcsv = (tmp_path / "spectra" / "spectrum_quantum.csv").read_text()
    ccsv = (tmp_path / "spectra" / "spectrum_classical.csv").read_text()
    for text in (qcsv, ccsv):
        assert "re,im,modulus" in text
        assert len([l for l in text.splitlines() if not l.startswith("#")]) == 7
    assert (tmp_path / "spectra" / "transfer_matrix.txt").exists()
    assert (tmp_path / "spectra" / "stationary_density.csv").exists()


def test_gap_compare_command(tmp_path):
    assert run_cli(["gap-compare", "--grid", "3:3:1", "--N", "64", "--hbar",
                    "0.25", "--n-eigs", "5", "--samples-per-cell", "50",
                    "--cell-side", "0.4", "--lyapunov-M", "10",
                    "--lyapunov-steps", "2000", "--out", str(tmp_path)]) == 0
    text = (tmp_path / "gap-compare" / "sweep.csv").read_text()
    header = [l for l in text.splitlines() if not l.startswith("#")][0]
    assert header.split(",")[:3] == ["K", "otoc_decay_rate", "otoc_growth_rate"]
    assert "quantum_gap_rate" in header


def test_decay_sweep_command(tmp_path):
    assert run_cli(["decay-sweep", "--grid", "5:5:1", "--N", "64", "--hbar",
                    "0.25", "--T", "10", "--lyapunov-M", "10",
                    "--lyapunov-steps", "2000", "--format", "csv,svg",
                    "--out", str(tmp_path)]) == 0
    assert (tmp_path / "decay-sweep" / "sweep.csv").exists()
    assert (tmp_path / "decay-sweep" / "sweep.svg").exists()


def test_config_file_flags_win(tmp_path):
    cfgfile = tmp_path / "run.json"
    cfgfile.write_text(json.dumps({"K": 2.0, "N": 64, "hbar": 0.25, "T": 3}))
    assert run_cli(["otoc", "--config", str(cfgfile), "--K", "4.0",
                    "--out", str(tmp_path)]) == 0
    sidecar = json.loads((tmp_path / "otoc" / "run.json").read_text())
    assert sidecar["config"]["K"] == 4.0      # flag wins
    assert sidecar["config"]["N"] == 64       # from file


def test_config_file_unknown_keys_rejected(tmp_path, capsys):
    cfgfile = tmp_path / "run.json"
    cfgfile.write_text(json.dumps({"K": 2.0, "bogus": 1}))
    assert run_cli(["otoc", "--config", str(cfgfile), "--out", str(tmp_path)]) == 1
    err = capsys.readouterr().err
    record = json.loads(err.strip().splitlines()[-1])
    assert record["error"] == "ValueError"
    assert "bogus" in record["message"]


def test_failure_emits_machine_readable_error(tmp_path, capsys):
    # momentum window below 4*pi is rejected by the Hilbert space
    assert run_cli(["otoc", "--N", "64", "--hbar", "0.1",
                    "--out", str(tmp_path)]) == 1
    record = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert record["command"] == "otoc"
    assert record["error"] == "ValueError"


def test_env_var_output_root(tmp_path, monkeypatch):
    monkeypatch.setenv("DMKR_OUT", str(tmp_path / "envroot"))
    assert run_cli(["otoc", "--K", "2.0", "--N", "64", "--hbar", "0.25",
                    "--T", "3"]) == 0
    assert (tmp_path / "envroot" / "otoc" / "otoc.csv").exists()
