"""Fixed two-atom basis over {|0>, |1>, |r>} x {|0>, |1>, |r>}.

Basis order is row-major in the single-atom order (0, 1, r):
00, 01, 0r, 10, 11, 1r, r0, r1, rr.
"""
from __future__ import annotations

import numpy as np

LEVELS = ("0", "1", "r")
LABELS = tuple(a + b for a in LEVELS for b in LEVELS)
INDEX = {label: i for i, label in enumerate(LABELS)}
DIM = 9

COMPUTATIONAL_LABELS = ("00", "01", "10", "11")
COMPUTATIONAL_INDICES = tuple(INDEX[l] for l in COMPUTATIONAL_LABELS)


def ket(label: str) -> np.ndarray:
    """Unit basis vector for a two-atom label such as '1r'."""
    v = np.zeros(DIM, dtype=complex)
    v[INDEX[label]] = 1.0
    return v


def d_plus() -> np.ndarray:
    """Symmetric singly-excited combination (|1r> + |r1>)/sqrt(2)."""
    return (ket("1r") + ket("r1")) / np.sqrt(2.0)


def d_minus() -> np.ndarray:
    """Antisymmetric combination (|r1> - |1r>)/sqrt(2); decoupled from the drive."""
    return (ket("r1") - ket("1r")) / np.sqrt(2.0)


def computational_projector() -> np.ndarray:
    """4x9 isometry from the full space onto span{|00>,|01>,|10>,|11>}."""
    P = np.zeros((4, DIM), dtype=complex)
    for row, idx in enumerate(COMPUTATIONAL_INDICES):
        P[row, idx] = 1.0
    return P
