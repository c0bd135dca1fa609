"""Gate-quality figures of merit and (T_tot, V) parameter sweeps.

Infidelity follows I = 1 - |<psi_fin|psi(t_f)>|^2 for a benchmark initial
state, the dynamical phase error is the quadrature of Omega^2/(4V) over the
protocol, and the relative phase error measures the deviation of the phase
accumulated on |11> from pi. Sweeps rescale pulse amplitudes with 1/T_tot as
the protocol duration changes and emit deterministic CSV.
"""
from __future__ import annotations

import csv
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.integrate import quad

from .basis import COMPUTATIONAL_INDICES, DIM, INDEX
from .model import DriveMode, ModelParams
from .propagate import (
    IntegrationError,
    PropagationConfig,
    PropagationResult,
    default_config_for_mode,
    propagate,
)
from .pulses import PulseParams, make_schedule

log = logging.getLogger(__name__)

_IDX_00 = INDEX["00"]
_IDX_11 = INDEX["11"]


class PhaseUndefinedError(ValueError):
    """The |11> amplitude is too small to carry a meaningful phase."""


@dataclass(frozen=True)
class BenchmarkCase:
    """A benchmark initial state together with its ideal image.

    The target must be the action of the protocol's controlled-phase gate
    diag(1, -1, -1, -1) on the initial state within the computational
    subspace.
    """

    initial: np.ndarray
    target: np.ndarray
    label: str

    def __post_init__(self):
        for name, vec in (("initial", self.initial), ("target", self.target)):
            v = np.asarray(vec)
            if v.shape != (DIM,):
                raise ValueError(f"{name} state must be a length-{DIM} vector")
            if abs(np.linalg.norm(v) - 1.0) > 1e-9:
                raise ValueError(f"{name} state must be normalized")


def gate_diagonal() -> np.ndarray:
    """Diagonal of the ideal gate on (|00>, |01>, |10>, |11>)."""
    return np.array([1.0, -1.0, -1.0, -1.0])


def benchmark_case(amplitudes, label: str) -> BenchmarkCase:
    """Benchmark case from computational-subspace amplitudes (a00,a01,a10,a11)."""
    amps = np.asarray(amplitudes, dtype=complex)
    if amps.shape != (4,):
        raise ValueError("expected 4 computational amplitudes")
    initial = np.zeros(DIM, dtype=complex)
    target = np.zeros(DIM, dtype=complex)
    initial[list(COMPUTATIONAL_INDICES)] = amps
    target[list(COMPUTATIONAL_INDICES)] = amps * gate_diagonal()
    return BenchmarkCase(initial=initial, target=target, label=label)


def bell_benchmark() -> BenchmarkCase:
    """The standard case (|00>+|11>)/sqrt(2) -> (|00>-|11>)/sqrt(2)."""
    r = 1.0 / np.sqrt(2.0)
    return benchmark_case([r, 0.0, 0.0, r], "bell")


def infidelity(result: PropagationResult, case: BenchmarkCase) -> float:
    """1 - |<target|final>|^2; insensitive to any global phase."""
    return float(1.0 - abs(np.vdot(case.target, result.final_state)) ** 2)


def rydberg_leakage(state: np.ndarray) -> float:
    """Final population outside the computational subspace."""
    pops = np.abs(np.asarray(state)) ** 2
    return float(np.sum(pops) - np.sum(pops[list(COMPUTATIONAL_INDICES)]))


def dynamical_phase_error(schedule, blockade: float) -> float:
    """Excess dynamical phase integral Omega(t)^2 / (4 V) dt in rad.

    The Rabi field vanishes identically in phase II, so the quadrature runs
    over phases I and III only.
    """
    if blockade <= 0:
        raise ValueError("blockade must be positive")
    b1, b2 = schedule.phase_boundaries

    def integrand(t):
        return schedule.omega(t) ** 2

    opts = dict(epsabs=1e-13, epsrel=1e-11, limit=200)
    total = quad(integrand, 0.0, b1, **opts)[0]
    total += quad(integrand, b2, schedule.total_time, **opts)[0]
    return total / (4.0 * blockade)


def relative_phase_error(result: PropagationResult) -> float:
    """|phi_e|/pi with phi_e = pi - |arg<11|psi(t_f)>| for initial |11>.

    If the final state retains a |00> component (e.g. a superposition
    benchmark), its phase is used as the reference; otherwise the raw |11>
    phase is used (a propagated phase is physical, the Hamiltonian having no
    gauge freedom left once |00> is pinned at zero energy).
    """
    psi = result.final_state
    a11 = psi[_IDX_11]
    if abs(a11) < 1e-6:
        raise PhaseUndefinedError("final |11> amplitude below 1e-6")
    a00 = psi[_IDX_00]
    ref = np.angle(a00) if abs(a00) > 1e-6 else 0.0
    phi = np.angle(a11) - ref
    phi = (phi + np.pi) % (2.0 * np.pi) - np.pi
    return float(abs(np.pi - abs(phi)) / np.pi)


@dataclass
class SweepGrid:
    """Rectangular (T_tot, V) sweep results for one drive mode."""

    total_times: np.ndarray
    blockades: np.ndarray  # rad/us
    drive_mode: DriveMode
    infidelity: np.ndarray
    phase_error: np.ndarray
    leakage: np.ndarray
    failures: list = field(default_factory=list)  # (i, j, message)


def _sweep_cell(args):
    (i, j, total_time, blockade, pulse_template, model_template, case,
     config, detuning_shape) = args
    params = replace(pulse_template, total_time=total_time)
    schedule = make_schedule(params, detuning_shape=detuning_shape)
    model = replace(model_template, blockade=blockade)
    try:
        result = propagate(model, schedule, config, case.initial)
    except IntegrationError as exc:
        return i, j, None, str(exc)
    inf = infidelity(result, case)
    try:
        pherr = relative_phase_error(result)
    except PhaseUndefinedError:
        pherr = float("nan")
    leak = rydberg_leakage(result.final_state)
    return i, j, (inf, pherr, leak), None


def run_sweep(
    pulse_template: PulseParams,
    model_template: ModelParams,
    case: BenchmarkCase,
    total_times,
    blockades,
    config: PropagationConfig | None = None,
    detuning_shape: str = "sine",
    jobs: int = 1,
) -> SweepGrid:
    """Fill a (T_tot, V) grid with infidelity / phase error / leakage.

    Amplitude rescaling with total time happens inside PulseParams; blockades
    are angular frequencies (rad/us). Cells where the integrator fails are
    recorded in ``failures`` and left as NaN; the sweep continues.
    """
    total_times = np.asarray(list(total_times), dtype=float)
    blockades = np.asarray(list(blockades), dtype=float)
    if config is None:
        config = default_config_for_mode(model_template.drive_mode)
    shape = (len(total_times), len(blockades))
    grid = SweepGrid(
        total_times=total_times,
        blockades=blockades,
        drive_mode=model_template.drive_mode,
        infidelity=np.full(shape, np.nan),
        phase_error=np.full(shape, np.nan),
        leakage=np.full(shape, np.nan),
    )
    tasks = [
        (i, j, float(T), float(V), pulse_template, model_template, case,
         config, detuning_shape)
        for i, T in enumerate(total_times)
        for j, V in enumerate(blockades)
    ]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(_sweep_cell, tasks))
    else:
        outcomes = [_sweep_cell(t) for t in tasks]
    for i, j, values, error in outcomes:
        if error is not None:
            grid.failures.append((i, j, error))
            log.warning("sweep cell (%d, %d) failed: %s", i, j, error)
            continue
        grid.infidelity[i, j], grid.phase_error[i, j], grid.leakage[i, j] = values
    return grid


def write_sweep_csv(grid: SweepGrid, path) -> None:
    """Deterministic CSV: T_tot_us, V_MHz, infidelity, phase_error, leakage."""
    with open(path, "w", newline="\n") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["T_tot_us", "V_MHz", "infidelity", "phase_error", "leakage"])
        for i, T in enumerate(grid.total_times):
            for j, V in enumerate(grid.blockades):
                writer.writerow(
                    [
                        format(T, ".17g"),
                        format(V / (2.0 * np.pi), ".17g"),
                        format(grid.infidelity[i, j], ".17g"),
                        format(grid.phase_error[i, j], ".17g"),
                        format(grid.leakage[i, j], ".17g"),
                    ]
                )
