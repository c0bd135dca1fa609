"""Command-line entry point: configs in, reproducible result files out.

Subcommands: ``pulse-dump``, ``sweep``, ``qpt``, ``qec``, ``verify``. Every
artifact-writing subcommand also emits a JSON manifest carrying the config
hash, the toolkit version and the wall time. Exit codes: 0 success,
1 validation error, 2 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time
from dataclasses import replace

import numpy as np

from . import __version__
from .basis import LABELS, d_minus, ket
from .config import ConfigError, RunConfig, config_hash, parse_config, serialize_config
from .metrics import bell_benchmark, run_sweep, write_sweep_csv
from .model import (
    DegenerateSpectrumError,
    DriveMode,
    TwoLevelBlock,
    cd_amplitude,
    cd_general_formula,
    hamiltonian_for_mode,
    reduced_model_blockaded,
    two_level_block_hamiltonian,
)
from .propagate import (
    IntegrationError,
    expm_hermitian,
    full_propagator,
    magnus_period_check,
    propagate,
    unitarity_defect,
)
from .pulses import make_schedule
from .qec import (
    QecError,
    density_matrix_deviation,
    physical_cnot,
    run_code,
    standard_configurations,
)
from .tomography import (
    BASIS_LABELS,
    chi_deviation,
    chi_of_target,
    process_from_propagator,
    reconstruct_chi,
)

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_NUMERICAL = 2

OUTPUT_DIR_ENV = "RYDCZ_OUTPUT_DIR"


def _fmt(x) -> str:
    return format(float(x), ".17g")


def _json_dump(obj, path) -> None:
    with open(path, "w", newline="\n") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _complex_table(M: np.ndarray):
    """JSON-friendly {real, imag} nested lists of a complex matrix."""
    M = np.asarray(M)
    return {"real": M.real.tolist(), "imag": M.imag.tolist()}


def _output_dir(cfg: RunConfig, args) -> str:
    out = getattr(args, "output", None) or os.environ.get(OUTPUT_DIR_ENV) \
        or cfg.output_directory
    os.makedirs(out, exist_ok=True)
    return out


def _write_manifest(out: str, name: str, cfg: RunConfig, t_start: float, files):
    _json_dump(
        {
            "subcommand": name,
            "config_hash": config_hash(cfg),
            "version": __version__,
            "wall_time_s": time.monotonic() - t_start,
            "files": sorted(files),
        },
        os.path.join(out, f"{name}-manifest.json"),
    )


# --- subcommands -------------------------------------------------------------


def cmd_pulse_dump(cfg: RunConfig, args) -> int:
    out = _output_dir(cfg, args)
    t0 = time.monotonic()
    schedule = make_schedule(cfg.pulse_params(), detuning_shape=cfg.pulses.detuning_shape)
    blocks = (TwoLevelBlock(0), TwoLevelBlock(1))

    samples = args.samples if args.samples is not None else cfg.pulse_samples
    ts = np.linspace(0.0, schedule.total_time, samples)
    path = os.path.join(out, "pulse.csv")
    with open(path, "w", newline="\n") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["t_us", "omega_rad_per_us", "delta_rad_per_us", "f0", "f1"])
        for t in ts:
            writer.writerow(
                [_fmt(t), _fmt(schedule.omega(t)), _fmt(schedule.delta(t))]
                + [_fmt(cd_amplitude(b, schedule, t)) for b in blocks]
            )
    files = ["pulse.csv"]

    if args.dump_hamiltonian:
        t_mid = 0.5 * schedule.phase_boundaries[0]  # middle of the first pulse
        tables = {}
        for mode in DriveMode:
            params = cfg.model_params(drive_mode=mode.value)
            tables[mode.value] = _complex_table(
                hamiltonian_for_mode(params, schedule, t_mid)
            )
        _json_dump(
            {"t_us": t_mid, "basis": list(LABELS), "hamiltonians": tables},
            os.path.join(out, "hamiltonian.json"),
        )
        files.append("hamiltonian.json")

    if args.trajectory:
        params = cfg.model_params()
        config = replace(
            cfg.propagation_config(), trajectory_samples=cfg.trajectory_samples
        )
        case = bell_benchmark()
        result = propagate(params, schedule, config, case.initial)
        path = os.path.join(out, "trajectory.csv")
        with open(path, "w", newline="\n") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["t_us"] + [f"p_{l}" for l in LABELS] + ["norm"])
            for t, psi in result.trajectory:
                pops = np.abs(psi) ** 2
                writer.writerow(
                    [_fmt(t)] + [_fmt(p) for p in pops] + [_fmt(np.linalg.norm(psi))]
                )
        files.append("trajectory.csv")

    _write_manifest(out, "pulse-dump", cfg, t0, files)
    return EXIT_OK


def cmd_sweep(cfg: RunConfig, args) -> int:
    out = _output_dir(cfg, args)
    t0 = time.monotonic()
    grid = run_sweep(
        cfg.pulse_params(),
        cfg.model_params(),
        bell_benchmark(),
        cfg.sweep.total_times_us,
        [2.0 * np.pi * v for v in cfg.sweep.blockades_mhz],
        config=cfg.propagation_config(),
        detuning_shape=cfg.pulses.detuning_shape,
        jobs=args.jobs,
    )
    write_sweep_csv(grid, os.path.join(out, "sweep.csv"))
    _json_dump(
        {
            "config": serialize_config(cfg),
            "config_hash": config_hash(cfg),
            "drive_mode": grid.drive_mode.value,
            "failures": [list(f) for f in grid.failures],
        },
        os.path.join(out, "sweep.json"),
    )
    _write_manifest(out, "sweep", cfg, t0, ["sweep.csv", "sweep.json"])
    if grid.failures:
        print(f"sweep: {len(grid.failures)} cell(s) failed to converge", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


def cmd_qpt(cfg: RunConfig, args) -> int:
    out = _output_dir(cfg, args)
    t0 = time.monotonic()
    schedule = make_schedule(cfg.pulse_params(), detuning_shape=cfg.pulses.detuning_shape)
    params = cfg.model_params()
    U = full_propagator(params, schedule, cfg.propagation_config())
    K = process_from_propagator(U)
    chi = reconstruct_chi(K)
    reference = chi_of_target(cfg.qpt.target_convention)
    mag, phase = chi_deviation(chi, reference)

    _json_dump(
        {
            "config_hash": config_hash(cfg),
            "target_convention": cfg.qpt.target_convention,
            "basis": list(BASIS_LABELS),
            "chi": _complex_table(chi),
            "chi_reference": _complex_table(reference),
            "deviation_magnitude": mag.tolist(),
            "deviation_phase": phase.tolist(),
            "max_abs_deviation": float(mag.max()),
        },
        os.path.join(out, "qpt.json"),
    )
    path = os.path.join(out, "qpt_deviation.csv")
    with open(path, "w", newline="\n") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["row", "col", "magnitude", "phase"])
        for i, ri in enumerate(BASIS_LABELS):
            for j, cj in enumerate(BASIS_LABELS):
                writer.writerow([ri, cj, _fmt(mag[i, j]), _fmt(phase[i, j])])
    _write_manifest(out, "qpt", cfg, t0, ["qpt.json", "qpt_deviation.csv"])
    print(f"qpt: max |delta chi| = {mag.max():.3e}")
    return EXIT_OK


def _gate_kraus(cfg: RunConfig, drive_mode: str, ecd_frequency_mhz: float):
    schedule = make_schedule(cfg.pulse_params(), detuning_shape=cfg.pulses.detuning_shape)
    params = cfg.model_params(
        drive_mode=drive_mode, ecd_frequency_mhz=ecd_frequency_mhz
    )
    U = full_propagator(params, schedule, cfg.propagation_config(DriveMode(drive_mode)))
    return process_from_propagator(U)


def cmd_qec(cfg: RunConfig, args) -> int:
    out = _output_dir(cfg, args)
    t0 = time.monotonic()
    cnots = {
        "ecd": physical_cnot(
            _gate_kraus(cfg, "ecd-only", cfg.qec.ecd_frequency_mhz), label="cnot-ecd"
        ),
        "adiabatic": physical_cnot(
            _gate_kraus(cfg, "adiabatic", cfg.qec.ecd_frequency_mhz),
            label="cnot-adiabatic",
        ),
    }

    report = {}
    summary = []
    for label, state, flip in standard_configurations():
        entry = {}
        for mode, cnot in cnots.items():
            res = run_code(state, flip, cnot)
            mag, phase = density_matrix_deviation(res.recovered, state)
            entry[mode] = {
                "fidelity": res.fidelity,
                "leakage": res.leakage,
                "syndrome_probabilities": list(res.syndrome_probabilities),
                "delta_rho_magnitude": mag.tolist(),
                "delta_rho_phase": phase.tolist(),
            }
        report[label] = entry
        summary.append((label, entry["ecd"]["fidelity"], entry["adiabatic"]["fidelity"]))

    _json_dump(
        {"config_hash": config_hash(cfg), "configurations": report},
        os.path.join(out, "qec.json"),
    )
    path = os.path.join(out, "qec_summary.csv")
    with open(path, "w", newline="\n") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["configuration", "fidelity_ecd", "fidelity_adiabatic"])
        for label, f_ecd, f_ad in summary:
            writer.writerow([label, _fmt(f_ecd), _fmt(f_ad)])
    _write_manifest(out, "qec", cfg, t0, ["qec.json", "qec_summary.csv"])
    for label, f_ecd, f_ad in summary:
        print(f"qec[{label}]: ecd {f_ecd:.6f}  adiabatic {f_ad:.6f}")
    return EXIT_OK


# --- verify suite ------------------------------------------------------------


def _verify_checks(cfg: RunConfig):
    """Yield (name, defect, tolerance) triples for the property suite."""
    rng = np.random.default_rng(cfg.seed)
    schedule = make_schedule(cfg.pulse_params(), detuning_shape=cfg.pulses.detuning_shape)
    T = schedule.total_time
    b1, b2 = schedule.phase_boundaries

    # Hermiticity of every drive mode at random times.
    defect = 0.0
    ts = rng.uniform(0.0, T, 200)
    for mode in DriveMode:
        params = cfg.model_params(drive_mode=mode.value)
        for t in ts:
            H = hamiltonian_for_mode(params, schedule, t)
            defect = max(defect, float(np.max(np.abs(H - H.conj().T))))
    yield "hermiticity", defect, 1e-12

    # Unitarity of the full protocol propagator.
    params_ad = cfg.model_params(drive_mode="adiabatic")
    config_ad = cfg.propagation_config(DriveMode.ADIABATIC)
    U = full_propagator(params_ad, schedule, config_ad)
    yield "unitarity", unitarity_defect(U), 1e-8

    # Norm conservation along a sampled trajectory.
    case = bell_benchmark()
    config_traj = replace(config_ad, trajectory_samples=100)
    result = propagate(params_ad, schedule, config_traj, case.initial)
    norm_defect = max(
        abs(np.linalg.norm(psi) - 1.0) for _, psi in result.trajectory
    )
    yield "norm-conservation", norm_defect, 1e-9

    # Dark states |00> and (|r1> - |1r>)/sqrt(2) under every mode: no
    # coupling out of the state (a diagonal energy is allowed) and unit
    # survival probability under the full propagator.
    dm = d_minus()
    dark = 0.0
    for mode in DriveMode:
        params = cfg.model_params(drive_mode=mode.value)
        for t in ts[:50]:
            H = hamiltonian_for_mode(params, schedule, t)
            for s in (ket("00"), dm):
                v = H @ s
                off = v - np.vdot(s, v) * s
                dark = max(dark, float(np.max(np.abs(off))))
    dark = max(dark, float(abs(abs(U[0, 0]) - 1.0)))
    dark = max(dark, float(abs(abs(np.vdot(dm, U @ dm)) - 1.0)))
    yield "dark-states", dark, 1e-8

    # Counterdiabatic closed form vs the spectral formula on each 2x2 block.
    cd_defect = 0.0
    pulse_ts = np.concatenate(
        [rng.uniform(0.02 * b1, 0.98 * b1, 50), rng.uniform(b2 + 0.02 * b1, T - 0.02 * b1, 50)]
    )
    sigma_y = np.array([[0.0, -1j], [1j, 0.0]])
    for k in (0, 1):
        block = TwoLevelBlock(k)

        def h_of_t(t, block=block):
            return two_level_block_hamiltonian(block, schedule, t)

        def dh_of_t(t, block=block):
            dom = block.rabi_factor * schedule.omega_dot(t)
            dde = schedule.delta_dot(t)
            return 0.5 * np.array([[0.0, dom], [dom, 2.0 * dde]], dtype=complex)

        for t in pulse_ts:
            try:
                Hcd = cd_general_formula(h_of_t, dh_of_t, t)
            except DegenerateSpectrumError:
                continue
            closed = -0.5 * cd_amplitude(block, schedule, t) * sigma_y
            cd_defect = max(cd_defect, float(np.max(np.abs(Hcd - closed))))
    yield "cd-oracle", cd_defect, 1e-9

    # High-frequency construction over one drive period inside phase I.
    params_ecd = cfg.model_params(drive_mode="ecd-only")
    h0, h1 = magnus_period_check(params_ecd, schedule, 0.3 * b1)
    yield "magnus-order-0", h0, 1e-6
    yield "magnus-order-1", h1, 1e-3

    # Adiabatic elimination: reduced-model error shrinks when V grows.
    psi11 = ket("11")
    errors = []
    for v_mhz in (500.0, 1000.0):
        params = cfg.model_params(blockade_mhz=v_mhz, drive_mode="adiabatic")
        full = propagate(params, schedule, config_ad, psi11).final_state
        n_red = 4000
        dt = T / n_red
        red = np.array([1.0, 0.0], dtype=complex)
        for i in range(n_red):
            Hr = reduced_model_blockaded(schedule, (i + 0.5) * dt)
            red = expm_hermitian(Hr, dt) @ red
        proj = np.array([full[4], (full[5] + full[7]) / np.sqrt(2.0)])
        errors.append(float(np.linalg.norm(proj - red)))
    yield "elimination-convergence", errors[1] / errors[0], 0.75


def cmd_verify(cfg: RunConfig, args) -> int:
    failures = 0
    for name, value, tol in _verify_checks(cfg):
        ok = value <= tol
        failures += not ok
        print(f"{'PASS' if ok else 'FAIL'}  {name:26s} {value:.3e} (tolerance {tol:.0e})")
    if failures:
        print(f"verify: {failures} check(s) failed", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


# --- argument parsing --------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rydcz",
        description="Shortcut-to-adiabaticity controlled-phase gate simulator "
        "(frequencies in config files are plain MHz; times in microseconds).",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def common(p):
        p.add_argument("--config", default=None, help="YAML config file (empty/omitted: defaults)")
        p.add_argument("--output", default=None,
                       help=f"output directory (overrides config and ${OUTPUT_DIR_ENV})")

    p = sub.add_parser("pulse-dump", help="dump pulse profiles and drive amplitudes as CSV")
    common(p)
    p.add_argument("--samples", type=int, default=None, help="number of time samples")
    p.add_argument("--dump-hamiltonian", action="store_true",
                   help="also write the drive Hamiltonians at mid-pulse as JSON")
    p.add_argument("--trajectory", action="store_true",
                   help="also propagate the Bell benchmark and write populations CSV")
    p.set_defaults(func=cmd_pulse_dump)

    p = sub.add_parser("sweep", help="run a (T_tot, V) infidelity sweep")
    common(p)
    p.add_argument("--jobs", type=int, default=os.cpu_count() or 1,
                   help="worker processes (default: logical CPU count)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("qpt", help="process tomography against the ideal gate")
    common(p)
    p.set_defaults(func=cmd_qpt)

    p = sub.add_parser("qec", help="run the bit-flip-code benchmark suite")
    common(p)
    p.set_defaults(func=cmd_qec)

    p = sub.add_parser("verify", help="run the numerical property suite")
    common(p)
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.config is None:
            cfg = RunConfig()
        else:
            cfg = parse_config(args.config)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    try:
        return args.func(cfg, args)
    except (IntegrationError, QecError, DegenerateSpectrumError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
