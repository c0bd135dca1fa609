"""Minimal three-qubit bit-flip code driven by the simulated CZ gate.

Four qubits: the data qubit q0, two code qubits q1 and q2, and a syndrome
ancilla q3 (16x16 density matrices). CNOT gates are composed from the
physical controlled-phase map and perfect single-qubit rotations,

    CNOT = R_c^x(pi) R_t^y(-pi/2) CZ R_t^y(pi/2) R_c^x(pi),

with R(theta) = exp(i theta sigma / 2) and CZ the diag(1, -1, -1, -1)
controlled-phase realized by the protocol. With that convention the
composition equals the textbook CNOT up to a Z phase on the control, which
cancels pairwise over the encode, syndrome and decode stages of this
circuit. (Composing around the canonical diag(1, 1, 1, -1) gate instead
would yield a control-inverted CNOT.) All single-qubit operations are
treated as perfect.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .tomography import target_unitary

_I = np.eye(2, dtype=complex)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
_Z = np.array([[1, 0], [0, -1]], dtype=complex)

N_QUBITS = 4
DIM = 2**N_QUBITS


class QecError(RuntimeError):
    """The physical gate is too far from the target for the code to run."""


@dataclass(frozen=True)
class GateMap:
    """A gate as a single Kraus operator on the addressed qubits."""

    label: str
    arity: int
    kraus: np.ndarray

    def __post_init__(self):
        dim = 2**self.arity
        k = np.asarray(self.kraus)
        if k.shape != (dim, dim):
            raise ValueError(f"{self.label}: Kraus operator must be {dim}x{dim}")
        norm = np.linalg.norm(k, 2)
        if norm > 1.0 + 1e-9:
            raise ValueError(f"{self.label}: Kraus norm {norm:.6f} exceeds 1")


def rotation(axis: str, theta: float) -> np.ndarray:
    """Single-qubit rotation exp(i theta sigma_axis / 2)."""
    sigma = {"x": _X, "y": _Y, "z": _Z}[axis]
    return expm(0.5j * theta * sigma)


def physical_cnot(cz_kraus: np.ndarray, label: str = "cnot") -> GateMap:
    """CNOT (control = first qubit) composed around a physical CZ map.

    ``cz_kraus`` is the 4x4 computational-subspace Kraus operator of the
    simulated gate, expected to approximate diag(1, -1, -1, -1); see the
    module docstring for why the composition requires that convention.
    """
    K = np.asarray(cz_kraus, dtype=complex)
    rc = np.kron(rotation("x", np.pi), _I)
    rt_pre = np.kron(_I, rotation("y", np.pi / 2.0))
    rt_post = np.kron(_I, rotation("y", -np.pi / 2.0))
    return GateMap(label=label, arity=2, kraus=rc @ rt_post @ K @ rt_pre @ rc)


def ideal_cnot() -> GateMap:
    """Baseline CNOT built from the perfect diag(1,-1,-1,-1) gate."""
    return physical_cnot(target_unitary("protocol"), label="cnot-ideal")


def _embed(op: np.ndarray, qubits: tuple[int, ...]) -> np.ndarray:
    """Embed a k-qubit operator acting on ``qubits`` into the 4-qubit space."""
    k = len(qubits)
    if sorted(set(qubits)) != sorted(qubits) or len(set(qubits)) != k:
        raise ValueError("qubits must be distinct")
    rest = [q for q in range(N_QUBITS) if q not in qubits]
    perm = list(qubits) + rest
    full = np.kron(op, np.eye(2 ** (N_QUBITS - k), dtype=complex))
    T = full.reshape([2] * (2 * N_QUBITS))
    inv = np.argsort(perm)
    T = np.transpose(T, list(inv) + [N_QUBITS + p for p in inv])
    return T.reshape(DIM, DIM)


def _apply(rho: np.ndarray, op: np.ndarray, qubits: tuple[int, ...]) -> np.ndarray:
    K = _embed(op, qubits)
    return K @ rho @ K.conj().T


@dataclass
class RecoveryResult:
    recovered: np.ndarray  # renormalized 2x2 density matrix of the data qubit
    fidelity: float
    leakage: float
    syndrome_probabilities: tuple[float, float]


def run_code(input_state, flip: bool, cnot: GateMap) -> RecoveryResult:
    """Encode, optionally flip q0, extract the syndrome, recover, decode.

    Pipeline (all non-CNOT operations perfect): encode with CNOT(q0->q1),
    CNOT(q0->q2); optional X on q0; syndrome CNOT(q0->q3), CNOT(q1->q3);
    projective ancilla measurement with conditional X recovery on q0; decode
    with CNOT(q0->q2), CNOT(q0->q1); trace out everything but q0.
    """
    psi_in = np.asarray(input_state, dtype=complex)
    if psi_in.shape != (2,) or abs(np.linalg.norm(psi_in) - 1.0) > 1e-9:
        raise ValueError("input must be a normalized single-qubit state")
    if cnot.arity != 2:
        raise ValueError("cnot must be a two-qubit gate map")
    K = cnot.kraus

    psi0 = psi_in
    for _ in range(N_QUBITS - 1):
        psi0 = np.kron(psi0, np.array([1.0, 0.0], dtype=complex))
    rho = np.outer(psi0, psi0.conj())

    rho = _apply(rho, K, (0, 1))
    rho = _apply(rho, K, (0, 2))
    if flip:
        rho = _apply(rho, _X, (0,))
    rho = _apply(rho, K, (0, 3))
    rho = _apply(rho, K, (1, 3))

    p0_proj = np.outer([1.0, 0.0], [1.0, 0.0]).astype(complex)
    p1_proj = np.outer([0.0, 1.0], [0.0, 1.0]).astype(complex)
    branch0 = _apply(rho, p0_proj, (3,))
    branch1 = _apply(rho, p1_proj, (3,))
    branch1 = _apply(branch1, _X, (0,))  # perfect conditional recovery
    probs = (float(np.trace(branch0).real), float(np.trace(branch1).real))
    rho = branch0 + branch1

    rho = _apply(rho, K, (0, 2))
    rho = _apply(rho, K, (0, 1))

    reduced = rho.reshape(2, 8, 2, 8)
    rho_q0 = np.einsum("aibi->ab", reduced)
    trace = float(np.trace(rho_q0).real)
    leakage = 1.0 - trace
    if leakage > 0.5:
        raise QecError(f"leakage {leakage:.3f} exceeds 0.5; gate far from target")
    rho_q0 = rho_q0 / trace
    fidelity = float(np.real(psi_in.conj() @ rho_q0 @ psi_in))
    return RecoveryResult(
        recovered=rho_q0,
        fidelity=fidelity,
        leakage=leakage,
        syndrome_probabilities=probs,
    )


def density_matrix_deviation(recovered: np.ndarray, input_state):
    """Element-wise (|delta|, arg(delta)) between recovered rho and the input.

    Phases are zeroed where the magnitude is below 1e-12.
    """
    psi = np.asarray(input_state, dtype=complex)
    rho_in = np.outer(psi, psi.conj())
    delta = np.asarray(recovered) - rho_in
    mag = np.abs(delta)
    phase = np.where(mag > 1e-12, np.angle(delta), 0.0)
    return mag, phase


def standard_configurations():
    """The five benchmark configurations: {|0>, |1>, |+>} x {flip, no-flip}
    minus (|1>, no-flip), the configuration left invariant trivially."""
    plus = np.array([1.0, 1.0]) / np.sqrt(2.0)
    zero = np.array([1.0, 0.0])
    one = np.array([0.0, 1.0])
    return [
        ("0/no-flip", zero, False),
        ("0/flip", zero, True),
        ("1/flip", one, True),
        ("+/no-flip", plus, False),
        ("+/flip", plus, True),
    ]
