"""Hamiltonians of the blockaded two-atom system.

Builders for the adiabatic Hamiltonian, the exact counterdiabatic correction,
the oscillating effective-counterdiabatic (eCD) field and its single-atom
separable approximation, plus the two-level block reductions used as oracles.

All builders are pure functions of (params, schedule, t) returning dense 9x9
complex Hermitian matrices in the basis of :mod:`rydcz.basis`.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .basis import DIM, INDEX, ket

log = logging.getLogger(__name__)


class DriveMode(str, Enum):
    ADIABATIC = "adiabatic"
    EXACT_CD = "exact-cd"
    ECD_ONLY = "ecd-only"
    SEPARABLE = "separable"


@dataclass(frozen=True)
class ModelParams:
    """Blockade strength V and eCD carrier frequency omega, both rad/us."""

    blockade: float
    ecd_frequency: float = 0.0
    drive_mode: DriveMode = DriveMode.ADIABATIC

    def __post_init__(self):
        if self.blockade < 0:
            raise ValueError("blockade must be non-negative")
        if self.drive_mode in (DriveMode.ECD_ONLY, DriveMode.SEPARABLE):
            if self.ecd_frequency <= 0:
                raise ValueError("ecd_frequency must be positive for eCD modes")


@dataclass(frozen=True)
class TwoLevelBlock:
    """One of the two decoupled two-level problems; k=0 is {|1>,|r>} with the
    partner atom in |0>, k=1 is {|11>,|d+>} with sqrt(2)-enhanced Rabi."""

    k: int

    @property
    def rabi_factor(self) -> float:
        return np.sqrt(2.0) if self.k == 1 else 1.0


# --- static coupling operators --------------------------------------------

def _op(entries) -> np.ndarray:
    H = np.zeros((DIM, DIM), dtype=complex)
    for (row, col), val in entries.items():
        H[INDEX[row], INDEX[col]] += val
    return H


# |r><1| (x) P0  +  P0 (x) |r><1|   (lowering counterpart via dagger)
_L0 = _op({("r0", "10"): 1.0, ("0r", "01"): 1.0})
# |r><1| (x) P1  +  P1 (x) |r><1|
_L1 = _op({("r1", "11"): 1.0, ("1r", "11"): 1.0})
_X0 = _L0 + _L0.conj().T
_X1 = _L1 + _L1.conj().T
# |r><1| (x) 1  +  1 (x) |r><1|
_S = _op(
    {
        ("r0", "10"): 1.0,
        ("r1", "11"): 1.0,
        ("rr", "1r"): 1.0,
        ("0r", "01"): 1.0,
        ("1r", "11"): 1.0,
        ("rr", "r1"): 1.0,
    }
)
_XS = _S + _S.conj().T
# number of Rydberg excitations: P_r (x) 1 + 1 (x) P_r
_NR = np.diag([float(lab.count("r")) for lab in
               ("00", "01", "0r", "10", "11", "1r", "r0", "r1", "rr")]).astype(complex)
_RR = np.outer(ket("rr"), ket("rr").conj())


def hamiltonian_adiabatic(params: ModelParams, schedule, t: float) -> np.ndarray:
    """H(t) = H_d (x) 1 + 1 (x) H_d + V |rr><rr|."""
    om = schedule.omega(t)
    de = schedule.delta(t)
    hd = np.array(
        [[0.0, 0.0, 0.0], [0.0, 0.0, om / 2.0], [0.0, om / 2.0, de]], dtype=complex
    )
    eye = np.eye(3, dtype=complex)
    return np.kron(hd, eye) + np.kron(eye, hd) + params.blockade * _RR


def cd_amplitude(block: TwoLevelBlock, schedule, t: float) -> float:
    """Counterdiabatic amplitude f_k(t) of the two-level block, rad/us.

    At the degenerate point Omega_k = Delta = 0 the value 0 is returned by
    continuity (occurs only where the drive is entirely off).
    """
    c = block.rabi_factor
    om = c * schedule.omega(t)
    dom = c * schedule.omega_dot(t)
    de = schedule.delta(t)
    dde = schedule.delta_dot(t)
    denom = de * de + om * om
    if denom == 0.0:
        log.debug("degenerate point Delta=Omega_%d=0 at t=%g; f_k set to 0", block.k, t)
        return 0.0
    return (de * dom - om * dde) / denom


def hamiltonian_cd_exact(params: ModelParams, schedule, t: float) -> np.ndarray:
    """Exact counterdiabatic field H_CD(t) of the two decoupled blocks.

    Purely imaginary off-diagonal couplings: amplitude f_0/2 between |1> and
    |r> conditioned on the partner being in |0>, and f_1/2 between |11> and
    |d+>.
    """
    f0 = cd_amplitude(TwoLevelBlock(0), schedule, t)
    f1 = cd_amplitude(TwoLevelBlock(1), schedule, t)
    # (i f0/2)(L0^dag - L0) + (i f1/(2 sqrt 2))(L1^dag - L1)
    H = 0.5j * f0 * (_L0.conj().T - _L0)
    H += 0.5j * f1 / np.sqrt(2.0) * (_L1.conj().T - _L1)
    return H


class DegenerateSpectrumError(RuntimeError):
    """Instantaneous spectrum too close to degeneracy for the CD formula."""


def cd_general_formula(h_of_t, dh_of_t, t: float, gap_rtol: float = 1e-9) -> np.ndarray:
    """Generic counterdiabatic field i sum_{n,m!=n} |n><n|dH|m><m| / (E_m - E_n).

    ``h_of_t`` and ``dh_of_t`` are callables returning the Hamiltonian and its
    time derivative. Serves as an independent oracle for hamiltonian_cd_exact.
    """
    H = np.asarray(h_of_t(t), dtype=complex)
    dH = np.asarray(dh_of_t(t), dtype=complex)
    evals, evecs = np.linalg.eigh(H)
    scale = max(np.max(np.abs(evals)), 1.0)
    n = len(evals)
    out = np.zeros_like(H)
    M = evecs.conj().T @ dH @ evecs
    for a in range(n):
        for b in range(n):
            if a == b:
                continue
            gap = evals[b] - evals[a]
            if abs(gap) < gap_rtol * scale:
                if abs(M[a, b]) < 1e-14 * max(np.max(np.abs(dH)), 1.0):
                    continue  # decoupled degenerate pair contributes nothing
                raise DegenerateSpectrumError(
                    f"eigenvalue gap {gap:.3e} below tolerance at t={t}"
                )
            out += (
                1j
                * M[a, b]
                / gap
                * np.outer(evecs[:, a], evecs[:, b].conj())
            )
    return out


def _ecd_quadratures(params: ModelParams, schedule, t: float):
    """Signed oscillation amplitudes of the eCD field at time t.

    The sign of f_k is carried by the sine quadrature only, so that the
    first-order Magnus (high-frequency) average reproduces f_k including its
    sign; the {|11>,|d+>} channel amplitude carries an extra 2^(-1/4) because
    the bare coupling operator in that channel is sqrt(2)-enhanced. Among
    sign allocations equivalent at first order, the one with an opposite
    relative sign between the two Rydberg-number quadrature components is
    used: it minimizes the second-order (O(1/omega)) residual phase drift of
    the computational states.
    """
    w = params.ecd_frequency
    f0 = cd_amplitude(TwoLevelBlock(0), schedule, t)
    f1 = cd_amplitude(TwoLevelBlock(1), schedule, t)
    a0 = np.sqrt(w * abs(f0))
    a1 = np.sqrt(w * abs(f1)) / 2.0**0.25
    s0 = np.sign(f0) if f0 != 0.0 else 0.0
    s1 = np.sign(f1) if f1 != 0.0 else 0.0
    return a0, a1, s0, s1


def hamiltonian_ecd(params: ModelParams, schedule, t: float) -> np.ndarray:
    """Oscillating eCD field whose period average mimics H_CD(t)."""
    w = params.ecd_frequency
    a0, a1, s0, s1 = _ecd_quadratures(params, schedule, t)
    sin, cos = np.sin(w * t), np.cos(w * t)
    g1 = s0 * a0 * sin
    g2 = a1 * cos
    g3 = s1 * a1 * sin - a0 * cos
    return g1 * _X0 + g2 * _X1 + g3 * _NR


def hamiltonian_ecd_separable(params: ModelParams, schedule, t: float) -> np.ndarray:
    """Single-atom separable eCD field built from fbar = (f_0 + f_1)/2.

    Always meant to be used additively with the adiabatic H(t).
    """
    w = params.ecd_frequency
    f0 = cd_amplitude(TwoLevelBlock(0), schedule, t)
    f1 = cd_amplitude(TwoLevelBlock(1), schedule, t)
    fbar = 0.5 * (f0 + f1)
    amp = np.sqrt(w * abs(fbar))
    s = np.sign(fbar) if fbar != 0.0 else 0.0
    sin, cos = np.sin(w * t), np.cos(w * t)
    return amp * (s * sin * _XS - cos * _NR)


def reduced_model_blockaded(schedule, t: float) -> np.ndarray:
    """Adiabatically eliminated {|11>, |d+>} two-level Hamiltonian."""
    om = schedule.omega(t)
    de = schedule.delta(t)
    return 0.5 * np.array(
        [[0.0, np.sqrt(2.0) * om], [np.sqrt(2.0) * om, 2.0 * de]], dtype=complex
    )


def two_level_block_hamiltonian(block: TwoLevelBlock, schedule, t: float) -> np.ndarray:
    """H_k(t) = [[0, Omega_k/2], [Omega_k/2, Delta]]."""
    om = block.rabi_factor * schedule.omega(t)
    de = schedule.delta(t)
    return np.array([[0.0, om / 2.0], [om / 2.0, de]], dtype=complex)


def hamiltonian_for_mode(params: ModelParams, schedule, t: float) -> np.ndarray:
    """Dispatch to the Hamiltonian selected by params.drive_mode."""
    mode = params.drive_mode
    if mode == DriveMode.ADIABATIC:
        return hamiltonian_adiabatic(params, schedule, t)
    if mode == DriveMode.EXACT_CD:
        return hamiltonian_adiabatic(params, schedule, t) + hamiltonian_cd_exact(
            params, schedule, t
        )
    if mode == DriveMode.ECD_ONLY:
        return hamiltonian_ecd(params, schedule, t)
    if mode == DriveMode.SEPARABLE:
        return hamiltonian_adiabatic(params, schedule, t) + hamiltonian_ecd_separable(
            params, schedule, t
        )
    raise ValueError(f"unknown drive mode {mode!r}")


def cd_amplitude_sequence(block: TwoLevelBlock, schedule, ts) -> np.ndarray:
    """Vectorized f_k(t) over an array of times."""
    ts = np.atleast_1d(np.asarray(ts, dtype=float))
    c = block.rabi_factor
    om = c * np.asarray(schedule.omega(ts))
    dom = c * np.asarray(schedule.omega_dot(ts))
    de = np.asarray(schedule.delta(ts))
    dde = np.asarray(schedule.delta_dot(ts))
    denom = de * de + om * om
    safe = np.where(denom == 0.0, 1.0, denom)
    return np.where(denom == 0.0, 0.0, (de * dom - om * dde) / safe)


def hamiltonian_sequence(params: ModelParams, schedule, ts) -> np.ndarray:
    """Stack of mode Hamiltonians H(ts[i]) with shape (len(ts), 9, 9).

    Identical to evaluating hamiltonian_for_mode at each time, but assembled
    from vectorized pulse evaluations; used by the propagator hot path.
    """
    ts = np.atleast_1d(np.asarray(ts, dtype=float))
    mode = params.drive_mode
    out = np.zeros((len(ts), DIM, DIM), dtype=complex)

    def add(coeff, op):
        out[...] += np.asarray(coeff)[:, None, None] * op

    if mode in (DriveMode.ADIABATIC, DriveMode.EXACT_CD, DriveMode.SEPARABLE):
        om = np.asarray(schedule.omega(ts))
        de = np.asarray(schedule.delta(ts))
        add(0.5 * om, _XS)
        add(de, _NR)
        out += params.blockade * _RR
    if mode == DriveMode.EXACT_CD:
        f0 = cd_amplitude_sequence(TwoLevelBlock(0), schedule, ts)
        f1 = cd_amplitude_sequence(TwoLevelBlock(1), schedule, ts)
        add(0.5 * f0, 1j * (_L0.conj().T - _L0))
        add(0.5 * f1 / np.sqrt(2.0), 1j * (_L1.conj().T - _L1))
    if mode in (DriveMode.ECD_ONLY, DriveMode.SEPARABLE):
        w = params.ecd_frequency
        sin, cos = np.sin(w * ts), np.cos(w * ts)
        if mode == DriveMode.ECD_ONLY:
            f0 = cd_amplitude_sequence(TwoLevelBlock(0), schedule, ts)
            f1 = cd_amplitude_sequence(TwoLevelBlock(1), schedule, ts)
            a0 = np.sqrt(w * np.abs(f0))
            a1 = np.sqrt(w * np.abs(f1)) / 2.0**0.25
            s0, s1 = np.sign(f0), np.sign(f1)
            add(s0 * a0 * sin, _X0)
            add(a1 * cos, _X1)
            add(s1 * a1 * sin - a0 * cos, _NR)
        else:
            f0 = cd_amplitude_sequence(TwoLevelBlock(0), schedule, ts)
            f1 = cd_amplitude_sequence(TwoLevelBlock(1), schedule, ts)
            fbar = 0.5 * (f0 + f1)
            amp = np.sqrt(w * np.abs(fbar))
            s = np.sign(fbar)
            add(s * amp * sin, _XS)
            add(-amp * cos, _NR)
    return out


def max_cd_amplitude(schedule, samples: int = 512) -> float:
    """Rough maximum of |f_k| over the protocol, used for resolution checks."""
    ts = np.linspace(0.0, schedule.total_time, samples)
    best = 0.0
    for t in ts:
        for k in (0, 1):
            best = max(best, abs(cd_amplitude(TwoLevelBlock(k), schedule, float(t))))
    return best
