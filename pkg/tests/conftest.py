import numpy as np
import pytest

from noonsim import HilbertSpace, IntegratorConfig, default_params


@pytest.fixture
def space_small():
    """3 x 2 x 2 = dim 12, the standard micro-test space."""
    return HilbertSpace(2, 2)


@pytest.fixture
def params():
    """Reference operating point."""
    return default_params()


@pytest.fixture
def fine_cfg():
    """Integrator with a 1 ns cap, tight enough for 1e-6 closed-form checks."""
    return IntegratorConfig(dt_max=1e-9)


@pytest.fixture
def rng():
    return np.random.default_rng(20260809)


def fast_device_config():
    """Strong-coupling operating point so full runs finish in seconds.

    Used by CLI and determinism tests where physical accuracy is
    irrelevant; keeps the GHz detunings so the code paths (rotating terms,
    step control) stay identical to production runs.
    """
    return {
        "g_mhz": 50.0,
        "omega_rabi_mhz": 120.0,
        "n_guard": 2,
    }
