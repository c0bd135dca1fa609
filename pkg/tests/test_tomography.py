"""Process-matrix reconstruction: roundtrips, known gates, positivity."""
import numpy as np
import pytest

from rydcz.basis import DIM
from rydcz.tomography import (
    BASIS_LABELS,
    apply_kraus,
    chi_deviation,
    chi_of_target,
    process_from_propagator,
    reconstruct_chi,
    synthesize_map,
    target_unitary,
)


def _random_density(rng) -> np.ndarray:
    A = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    rho = A @ A.conj().T
    return rho / np.trace(rho)


def _random_unitary(rng) -> np.ndarray:
    A = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    Q, R = np.linalg.qr(A)
    return Q * (np.diag(R) / np.abs(np.diag(R)))


def test_target_unitaries():
    np.testing.assert_array_equal(
        np.diag(target_unitary("protocol")), [1, -1, -1, -1]
    )
    np.testing.assert_array_equal(
        np.diag(target_unitary("canonical")), [1, 1, 1, -1]
    )
    with pytest.raises(ValueError):
        target_unitary("bogus")


def test_process_from_propagator_identity():
    K = process_from_propagator(np.eye(DIM, dtype=complex))
    np.testing.assert_allclose(K, np.eye(4), atol=1e-14)
    with pytest.raises(ValueError):
        process_from_propagator(np.eye(4, dtype=complex))


def test_chi_of_identity_is_pure_ii():
    chi = reconstruct_chi(np.eye(4, dtype=complex))
    expected = np.zeros((16, 16))
    expected[0, 0] = 1.0
    np.testing.assert_allclose(chi, expected, atol=1e-14)


def test_chi_of_canonical_cz_closed_form():
    """CZ = (II + ZI + IZ - ZZ)/2, so chi has the matching 1/4-magnitude block."""
    chi = reconstruct_chi(target_unitary("canonical"))
    idx = {lab: i for i, lab in enumerate(BASIS_LABELS)}
    coeff = {"ii": 0.5, "zi": 0.5, "iz": 0.5, "zz": -0.5}
    for a, ca in coeff.items():
        for b, cb in coeff.items():
            assert chi[idx[a], idx[b]] == pytest.approx(ca * cb, abs=1e-14)
    # everything else vanishes
    live = set(coeff)
    for i, a in enumerate(BASIS_LABELS):
        for j, b in enumerate(BASIS_LABELS):
            if a not in live or b not in live:
                assert abs(chi[i, j]) < 1e-14


def test_roundtrip_on_random_density_matrices():
    """chi reconstruction followed by synthesis reproduces the map exactly."""
    rng = np.random.default_rng(11)
    U = _random_unitary(rng)
    chi = reconstruct_chi(U)
    act = synthesize_map(chi)
    for _ in range(50):
        rho = _random_density(rng)
        direct = apply_kraus(U, rho)
        assert np.max(np.abs(act(rho) - direct)) < 1e-10


def test_chi_positive_semidefinite_and_trace_for_unitaries():
    rng = np.random.default_rng(12)
    for _ in range(5):
        chi = reconstruct_chi(_random_unitary(rng))
        evals = np.linalg.eigvalsh(chi)
        assert evals.min() > -1e-10
        assert np.trace(chi).real == pytest.approx(1.0, abs=1e-12)


def test_trace_decreasing_map_loses_chi_trace():
    K = 0.5 * np.eye(4, dtype=complex)
    chi = reconstruct_chi(K)
    assert np.trace(chi).real == pytest.approx(0.25, abs=1e-12)


def test_non_physical_process_rejected():
    def act(rho):
        out = rho.copy()
        out[0, 1] += 1.0  # breaks the Hermiticity structure of the map
        return out

    with pytest.raises(ValueError):
        reconstruct_chi(act)


def test_chi_deviation_phase_masked_below_threshold():
    chi = chi_of_target("protocol")
    mag, phase = chi_deviation(chi, chi)
    assert np.max(mag) == 0.0
    assert np.max(np.abs(phase)) == 0.0
