"""Hamiltonian builders: Hermiticity, block oracles and eCD structure."""
import numpy as np
import pytest

from rydcz.basis import INDEX, ket, d_minus, d_plus
from rydcz.model import (
    DegenerateSpectrumError,
    DriveMode,
    ModelParams,
    TwoLevelBlock,
    cd_amplitude,
    cd_amplitude_sequence,
    cd_general_formula,
    hamiltonian_adiabatic,
    hamiltonian_cd_exact,
    hamiltonian_ecd,
    hamiltonian_ecd_separable,
    hamiltonian_for_mode,
    hamiltonian_sequence,
    max_cd_amplitude,
    reduced_model_blockaded,
    two_level_block_hamiltonian,
)

TWO_PI = 2.0 * np.pi


def _all_mode_params():
    return [
        ModelParams(blockade=TWO_PI * 500.0, drive_mode=DriveMode.ADIABATIC),
        ModelParams(blockade=TWO_PI * 500.0, drive_mode=DriveMode.EXACT_CD),
        ModelParams(
            blockade=TWO_PI * 500.0,
            ecd_frequency=TWO_PI * 300.0,
            drive_mode=DriveMode.ECD_ONLY,
        ),
        ModelParams(
            blockade=TWO_PI * 500.0,
            ecd_frequency=TWO_PI * 300.0,
            drive_mode=DriveMode.SEPARABLE,
        ),
    ]


def test_every_builder_returns_hermitian(reference_schedule):
    rng = np.random.default_rng(0)
    ts = rng.uniform(0.0, reference_schedule.total_time, 1000)
    for params in _all_mode_params():
        for t in ts[:250]:
            H = hamiltonian_for_mode(params, reference_schedule, float(t))
            assert np.max(np.abs(H - H.conj().T)) < 1e-12


def test_adiabatic_structure(reference_schedule):
    params = ModelParams(blockade=TWO_PI * 500.0)
    t = 0.1
    H = hamiltonian_adiabatic(params, reference_schedule, t)
    om = reference_schedule.omega(t)
    de = reference_schedule.delta(t)
    assert H[INDEX["rr"], INDEX["rr"]] == pytest.approx(params.blockade + 2.0 * de)
    assert H[INDEX["10"], INDEX["r0"]] == pytest.approx(om / 2.0)
    assert H[INDEX["11"], INDEX["1r"]] == pytest.approx(om / 2.0)
    assert H[INDEX["0r"], INDEX["0r"]] == pytest.approx(de)
    # |00> fully decoupled with zero energy
    assert np.max(np.abs(H @ ket("00"))) == 0.0


def test_dark_states_have_no_coupling(reference_schedule):
    dm = d_minus()
    rng = np.random.default_rng(1)
    for params in _all_mode_params():
        for t in rng.uniform(0.0, reference_schedule.total_time, 50):
            H = hamiltonian_for_mode(params, reference_schedule, float(t))
            for s in (ket("00"), dm):
                v = H @ s
                off = v - np.vdot(s, v) * s
                assert np.max(np.abs(off)) < 1e-12


def test_doubly_excited_coupling_strength(reference_schedule):
    """|d+> couples to |rr> with amplitude sqrt(2) * Omega / 2."""
    params = ModelParams(blockade=TWO_PI * 500.0)
    t = 0.1
    H = hamiltonian_adiabatic(params, reference_schedule, t)
    om = reference_schedule.omega(t)
    assert np.vdot(ket("rr"), H @ d_plus()) == pytest.approx(om / np.sqrt(2.0))


def test_cd_amplitude_against_spectral_formula(reference_schedule):
    """Closed-form f_k reproduces the generic spectral construction."""
    s = reference_schedule
    rng = np.random.default_rng(2)
    b1, b2 = s.phase_boundaries
    ts = np.concatenate(
        [rng.uniform(0.01 * b1, 0.99 * b1, 50),
         rng.uniform(b2 + 0.01 * b1, s.total_time - 0.01 * b1, 50)]
    )
    sigma_y = np.array([[0.0, -1j], [1j, 0.0]])
    for k in (0, 1):
        block = TwoLevelBlock(k)

        def h(t):
            return two_level_block_hamiltonian(block, s, t)

        def dh(t):
            dom = block.rabi_factor * s.omega_dot(t)
            return 0.5 * np.array(
                [[0.0, dom], [dom, 2.0 * s.delta_dot(t)]], dtype=complex
            )

        for t in ts:
            expected = -0.5 * cd_amplitude(block, s, float(t)) * sigma_y
            got = cd_general_formula(h, dh, float(t))
            assert np.max(np.abs(got - expected)) < 1e-9


def test_cd_general_formula_static_hamiltonian_gives_zero():
    H = np.array([[1.0, 0.5], [0.5, -1.0]], dtype=complex)
    zero = np.zeros_like(H)
    out = cd_general_formula(lambda t: H, lambda t: zero, 0.3)
    assert np.max(np.abs(out)) == 0.0


def test_cd_general_formula_flags_coupled_degeneracy():
    H = np.eye(2, dtype=complex)
    dH = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
    with pytest.raises(DegenerateSpectrumError):
        cd_general_formula(lambda t: H, lambda t: dH, 0.0)


def test_exact_cd_matches_blockwise_formula(reference_schedule):
    """The 9x9 CD field carries exactly the two block amplitudes."""
    s = reference_schedule
    params = ModelParams(blockade=TWO_PI * 500.0, drive_mode=DriveMode.EXACT_CD)
    for t in (0.05, 0.15, 0.2, 0.5):
        H = hamiltonian_cd_exact(params, s, t)
        f0 = cd_amplitude(TwoLevelBlock(0), s, t)
        f1 = cd_amplitude(TwoLevelBlock(1), s, t)
        assert H[INDEX["0r"], INDEX["01"]] == pytest.approx(-0.5j * f0)
        assert H[INDEX["r0"], INDEX["10"]] == pytest.approx(-0.5j * f0)
        # |11> -> |d+> matrix element is -i f1 / 2
        assert np.vdot(d_plus(), H @ ket("11")) == pytest.approx(-0.5j * f1)
        assert np.max(np.abs(H @ ket("rr"))) == 0.0


def test_cd_amplitude_degenerate_point_returns_zero(reference_schedule):
    assert cd_amplitude(TwoLevelBlock(0), reference_schedule, 0.0) == 0.0


def test_ecd_zero_in_phase_two(reference_schedule):
    s = reference_schedule
    b1, b2 = s.phase_boundaries
    params = ModelParams(
        blockade=TWO_PI * 500.0,
        ecd_frequency=TWO_PI * 300.0,
        drive_mode=DriveMode.ECD_ONLY,
    )
    t = 0.5 * (b1 + b2)
    assert np.max(np.abs(hamiltonian_ecd(params, s, t))) == 0.0
    assert np.max(np.abs(hamiltonian_ecd_separable(params, s, t))) == 0.0


def test_ecd_period_average_vanishes(reference_schedule):
    """Element-wise time average of the eCD field over one carrier period."""
    s = reference_schedule
    params = ModelParams(
        blockade=TWO_PI * 500.0,
        ecd_frequency=TWO_PI * 300.0,
        drive_mode=DriveMode.ECD_ONLY,
    )
    w = params.ecd_frequency
    t0 = 0.3 * s.phase_boundaries[0]
    ts = np.linspace(t0, t0 + TWO_PI / w, 2001)
    # freeze f_k at t0 so only the carrier oscillates
    a0, a1 = [np.sqrt(w * abs(cd_amplitude(TwoLevelBlock(k), s, t0))) for k in (0, 1)]
    Hs = []
    for t in ts:
        sin, cos = np.sin(w * t), np.cos(w * t)
        Hs.append(sin + cos)  # scalar carrier surrogate integrates to ~0
    # direct element-wise average of the real field (f_k vary slowly)
    avg = np.mean([hamiltonian_ecd(params, s, float(t)) for t in ts], axis=0)
    scale = max(a0, a1)
    assert np.max(np.abs(avg)) / scale < 5e-3


def test_ecd_never_couples_doubly_excited_state(reference_schedule):
    """The eCD-only drive has no matrix element into |rr>: V-independent."""
    s = reference_schedule
    params = ModelParams(
        blockade=TWO_PI * 500.0,
        ecd_frequency=TWO_PI * 300.0,
        drive_mode=DriveMode.ECD_ONLY,
    )
    rr = ket("rr")
    for t in (0.03, 0.1, 0.2, 0.5, 0.58):
        H = hamiltonian_ecd(params, s, t)
        v = H @ rr
        off = v - np.vdot(rr, v) * rr
        assert np.max(np.abs(off)) < 1e-12


def test_separable_field_is_single_atom_separable(reference_schedule):
    """H = A (x) 1 + 1 (x) A for a single-atom operator A."""
    s = reference_schedule
    params = ModelParams(
        blockade=TWO_PI * 500.0,
        ecd_frequency=TWO_PI * 300.0,
        drive_mode=DriveMode.SEPARABLE,
    )
    t = 0.1
    H = hamiltonian_ecd_separable(params, s, t)
    # recover A from the partial trace and rebuild
    T = H.reshape(3, 3, 3, 3)
    A = np.einsum("ikjk->ij", T) / 3.0  # trace over atom 2
    A -= np.trace(A) / 6.0 * np.eye(3)  # split the shared trace evenly
    eye = np.eye(3)
    rebuilt = np.kron(A, eye) + np.kron(eye, A)
    assert np.max(np.abs(rebuilt - H)) < 1e-10


def test_separable_merges_channels_when_amplitudes_agree(reference_schedule):
    """If f_0 = f_1 = fbar the separable coupling amplitude matches the
    two-channel field's with P_0 + P_1 merged (same sqrt(w |fbar|))."""
    s = reference_schedule
    params = ModelParams(
        blockade=TWO_PI * 500.0,
        ecd_frequency=TWO_PI * 300.0,
        drive_mode=DriveMode.SEPARABLE,
    )
    t = 0.1
    f0 = cd_amplitude(TwoLevelBlock(0), s, t)
    f1 = cd_amplitude(TwoLevelBlock(1), s, t)
    fbar = 0.5 * (f0 + f1)
    H = hamiltonian_ecd_separable(params, s, t)
    amp = abs(H[INDEX["01"], INDEX["0r"]])
    w = params.ecd_frequency
    expected = np.sqrt(w * abs(fbar)) * abs(np.sin(w * t))
    assert amp == pytest.approx(expected, rel=1e-12)


def test_reduced_model_structure(reference_schedule):
    s = reference_schedule
    b1, b2 = s.phase_boundaries
    t_off = 0.5 * (b1 + b2)  # Rabi field off
    H = reduced_model_blockaded(s, t_off)
    np.testing.assert_allclose(H, np.diag([0.0, s.delta(t_off)]), atol=1e-14)
    t_on = 0.1
    H = reduced_model_blockaded(s, t_on)
    assert H[0, 1] == pytest.approx(np.sqrt(2.0) * s.omega(t_on) / 2.0)


def test_hamiltonian_sequence_matches_scalar_builders(reference_schedule):
    rng = np.random.default_rng(3)
    ts = rng.uniform(0.0, reference_schedule.total_time, 40)
    for params in _all_mode_params():
        batch = hamiltonian_sequence(params, reference_schedule, ts)
        for i, t in enumerate(ts):
            H = hamiltonian_for_mode(params, reference_schedule, float(t))
            assert np.max(np.abs(batch[i] - H)) < 1e-12


def test_cd_amplitude_sequence_matches_scalar(reference_schedule):
    rng = np.random.default_rng(4)
    ts = rng.uniform(0.0, reference_schedule.total_time, 100)
    for k in (0, 1):
        block = TwoLevelBlock(k)
        batch = cd_amplitude_sequence(block, reference_schedule, ts)
        scalars = [cd_amplitude(block, reference_schedule, float(t)) for t in ts]
        np.testing.assert_allclose(batch, scalars, rtol=1e-14)


def test_max_cd_amplitude_positive(reference_schedule):
    assert max_cd_amplitude(reference_schedule) > 0.0


def test_model_params_validation():
    with pytest.raises(ValueError):
        ModelParams(blockade=-1.0)
    with pytest.raises(ValueError):
        ModelParams(blockade=1.0, drive_mode=DriveMode.ECD_ONLY)  # omega unset
