"""Shared fixtures: the reference pulse set and fast propagation configs."""
import numpy as np
import pytest

from rydcz.model import ModelParams, DriveMode
from rydcz.pulses import PulseParams, make_schedule

TWO_PI = 2.0 * np.pi


@pytest.fixture(scope="session")
def reference_params() -> PulseParams:
    """Reference pulse set: 17/23 MHz peaks, 0.594 us, 0.0945 us width."""
    return PulseParams(
        omega_max=TWO_PI * 17.0,
        delta_max=TWO_PI * 23.0,
        total_time=0.594,
        width=0.0945,
        phase2_fraction=0.1,
        reference_time=0.594,
    )


@pytest.fixture(scope="session")
def reference_schedule(reference_params):
    return make_schedule(reference_params)


@pytest.fixture(scope="session")
def adiabatic_model() -> ModelParams:
    return ModelParams(blockade=TWO_PI * 500.0, drive_mode=DriveMode.ADIABATIC)


@pytest.fixture(scope="session")
def ecd_model() -> ModelParams:
    return ModelParams(
        blockade=TWO_PI * 500.0,
        ecd_frequency=TWO_PI * 300.0,
        drive_mode=DriveMode.ECD_ONLY,
    )
