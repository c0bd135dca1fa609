"""End-to-end CLI runs: artifacts, manifests, determinism, exit codes."""
import csv
import json

import numpy as np
import pytest

from rydcz.cli import EXIT_NUMERICAL, EXIT_OK, EXIT_VALIDATION, OUTPUT_DIR_ENV, main


def _read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_pulse_dump_writes_csv_and_manifest(tmp_path):
    out = tmp_path / "out"
    rc = main(["pulse-dump", "--output", str(out), "--samples", "100"])
    assert rc == EXIT_OK
    rows = _read_csv(out / "pulse.csv")
    assert rows[0] == ["t_us", "omega_rad_per_us", "delta_rad_per_us", "f0", "f1"]
    assert len(rows) == 1 + 100
    manifest = json.loads((out / "pulse-dump-manifest.json").read_text())
    assert manifest["files"] == ["pulse.csv"]
    assert len(manifest["config_hash"]) == 64
    assert manifest["version"]


def test_pulse_dump_optional_artifacts(tmp_path):
    out = tmp_path / "out"
    rc = main(
        ["pulse-dump", "--output", str(out), "--samples", "50",
         "--dump-hamiltonian", "--trajectory"]
    )
    assert rc == EXIT_OK
    ham = json.loads((out / "hamiltonian.json").read_text())
    assert set(ham["hamiltonians"]) == {"adiabatic", "exact-cd", "ecd-only", "separable"}
    H = np.array(ham["hamiltonians"]["adiabatic"]["real"])
    assert H.shape == (9, 9)
    rows = _read_csv(out / "trajectory.csv")
    assert rows[0][0] == "t_us" and rows[0][-1] == "norm"
    assert len(rows[0]) == 11  # t + 9 populations + norm
    for row in rows[1:]:
        assert float(row[-1]) == pytest.approx(1.0, abs=1e-8)


def test_pulse_dump_byte_deterministic(tmp_path):
    outs = []
    for name in ("a", "b"):
        out = tmp_path / name
        assert main(["pulse-dump", "--output", str(out), "--samples", "64"]) == EXIT_OK
        outs.append((out / "pulse.csv").read_bytes())
    assert outs[0] == outs[1]


def test_sweep_two_by_two_grid(tmp_path):
    cfgfile = tmp_path / "cfg.yaml"
    cfgfile.write_text(
        "model:\n  drive_mode: adiabatic\n"
        "sweep:\n  total_times_us: [0.4, 0.6]\n  blockades_mhz: [100, 300]\n"
    )
    out = tmp_path / "out"
    rc = main(["sweep", "--config", str(cfgfile), "--output", str(out), "--jobs", "1"])
    assert rc == EXIT_OK
    rows = _read_csv(out / "sweep.csv")
    assert len(rows) == 1 + 4
    sidecar = json.loads((out / "sweep.json").read_text())
    assert sidecar["drive_mode"] == "adiabatic"
    assert "total_times_us" in sidecar["config"]


def test_env_var_overrides_output_directory(tmp_path, monkeypatch):
    out = tmp_path / "from-env"
    monkeypatch.setenv(OUTPUT_DIR_ENV, str(out))
    assert main(["pulse-dump", "--samples", "16"]) == EXIT_OK
    assert (out / "pulse.csv").exists()


def test_missing_config_file_is_validation_error(tmp_path, capsys):
    rc = main(["pulse-dump", "--config", str(tmp_path / "nope.yaml")])
    assert rc == EXIT_VALIDATION


def test_invalid_config_is_validation_error(tmp_path, capsys):
    cfgfile = tmp_path / "bad.yaml"
    cfgfile.write_text("pulses:\n  total_time_us: -1\n")
    rc = main(["pulse-dump", "--config", str(cfgfile)])
    assert rc == EXIT_VALIDATION
    assert "total_time_us" in capsys.readouterr().err


def test_nonconvergent_run_is_numerical_error(tmp_path):
    cfgfile = tmp_path / "strict.yaml"
    cfgfile.write_text(
        "propagation:\n  convergence_target: 1e-15\n  max_doublings: 1\n"
    )
    out = tmp_path / "out"
    rc = main(
        ["pulse-dump", "--config", str(cfgfile), "--output", str(out),
         "--samples", "16", "--trajectory"]
    )
    assert rc == EXIT_NUMERICAL


def test_qpt_meets_target_accuracy(tmp_path):
    out = tmp_path / "out"
    rc = main(["qpt", "--output", str(out)])
    assert rc == EXIT_OK
    report = json.loads((out / "qpt.json").read_text())
    assert report["max_abs_deviation"] < 1e-3
    rows = _read_csv(out / "qpt_deviation.csv")
    assert len(rows) == 1 + 256
    # trace loss of chi is the gate's leakage: small but nonzero
    chi = np.array(report["chi"]["real"]) + 1j * np.array(report["chi"]["imag"])
    assert 0.999 < np.trace(chi).real <= 1.0 + 1e-12
