"""Quantum process tomography of the simulated two-qubit gate.

The 9x9 protocol unitary is projected onto the computational subspace,
yielding a single (generally trace-decreasing) Kraus operator K = P U P^T.
The chi-matrix of the map rho -> K rho K^dagger is reconstructed by exact
linear inversion in the Pauli-product basis (II, IX, ..., ZZ).
"""
from __future__ import annotations

from itertools import product

import numpy as np

from .basis import computational_projector

_I = np.eye(2, dtype=complex)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
_Z = np.array([[1, 0], [0, -1]], dtype=complex)

PAULI_LABELS = ("i", "x", "y", "z")
BASIS_LABELS = tuple(a + b for a in PAULI_LABELS for b in PAULI_LABELS)
PAULI_PRODUCTS = tuple(
    np.kron(a, b) for a, b in product((_I, _X, _Y, _Z), repeat=2)
)

TARGET_CONVENTIONS = ("protocol", "canonical")


def target_unitary(convention: str = "protocol") -> np.ndarray:
    """Ideal 4x4 gate: the protocol's diag(1,-1,-1,-1), or canonical CZ.

    The two differ by perfect single-qubit Z(pi) frame rotations (Z (x) Z).
    """
    if convention == "protocol":
        return np.diag([1.0, -1.0, -1.0, -1.0]).astype(complex)
    if convention == "canonical":
        return np.diag([1.0, 1.0, 1.0, -1.0]).astype(complex)
    raise ValueError(f"convention must be one of {TARGET_CONVENTIONS}")


def process_from_propagator(U: np.ndarray) -> np.ndarray:
    """Effective computational-subspace Kraus operator K = P U P^T.

    Leakage out of the computational subspace shows up as trace loss of
    K rho K^dagger.
    """
    U = np.asarray(U, dtype=complex)
    if U.shape != (9, 9):
        raise ValueError("expected the full 9x9 propagator")
    P = computational_projector()
    return P @ U @ P.conj().T


def apply_kraus(K: np.ndarray, rho: np.ndarray) -> np.ndarray:
    """Single-Kraus map rho -> K rho K^dagger."""
    return K @ rho @ K.conj().T


def reconstruct_chi(process) -> np.ndarray:
    """chi-matrix of a two-qubit map by exact linear inversion.

    ``process`` is either a callable acting on 4x4 density matrices or a 4x4
    Kraus operator. The map is applied to the 16 matrix units |a><b|; the
    resulting superoperator S obeys S = sum_ij chi_ij A_i (x) conj(A_j) in
    row-major vectorization, and orthogonality of the Pauli products gives
    chi_ij = Tr[(A_i (x) conj(A_j))^dagger S] / 16.
    """
    if callable(process):
        act = process
    else:
        K = np.asarray(process, dtype=complex)
        if K.shape != (4, 4):
            raise ValueError("Kraus operator must be 4x4")
        act = lambda rho: apply_kraus(K, rho)

    S = np.zeros((16, 16), dtype=complex)
    for a in range(4):
        for b in range(4):
            unit = np.zeros((4, 4), dtype=complex)
            unit[a, b] = 1.0
            S[:, 4 * a + b] = np.asarray(act(unit), dtype=complex).reshape(16)

    chi = np.empty((16, 16), dtype=complex)
    for i, Ai in enumerate(PAULI_PRODUCTS):
        for j, Aj in enumerate(PAULI_PRODUCTS):
            B = np.kron(Ai, Aj.conj())
            chi[i, j] = np.trace(B.conj().T @ S) / 16.0
    defect = np.max(np.abs(chi - chi.conj().T))
    if defect > 1e-10:
        raise ValueError(f"chi Hermiticity defect {defect:.3e} exceeds 1e-10")
    return 0.5 * (chi + chi.conj().T)


def synthesize_map(chi: np.ndarray):
    """Callable rho -> sum_ij chi_ij A_i rho A_j^dagger (inversion roundtrip)."""
    chi = np.asarray(chi, dtype=complex)

    def act(rho):
        out = np.zeros((4, 4), dtype=complex)
        for i, Ai in enumerate(PAULI_PRODUCTS):
            for j, Aj in enumerate(PAULI_PRODUCTS):
                if chi[i, j] != 0.0:
                    out += chi[i, j] * (Ai @ rho @ Aj.conj().T)
        return out

    return act


def chi_of_target(convention: str = "protocol") -> np.ndarray:
    """Reference chi-matrix of the ideal gate under the chosen convention."""
    return reconstruct_chi(target_unitary(convention))


def chi_deviation(chi: np.ndarray, reference: np.ndarray):
    """Element-wise (|delta|, arg(delta)) tables of chi - reference.

    Phases are reported only where the magnitude exceeds 1e-12 (zero
    elsewhere), matching what a bar chart colored by phase can display.
    """
    delta = np.asarray(chi) - np.asarray(reference)
    mag = np.abs(delta)
    phase = np.where(mag > 1e-12, np.angle(delta), 0.0)
    return mag, phase
