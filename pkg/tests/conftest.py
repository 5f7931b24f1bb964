import math

import numpy as np
import pytest

from mirroratom import TransmonModel, TransmonParams

TWO_PI = 2.0 * math.pi

# reference device (independently measured spectroscopy values)
DEVICE = dict(
    e_c_hz=228e6,
    e_j_hz=13.67e9,
    levels=6,
    relax_rate_hz=2.264e6,
    dephase_rate_hz=0.0317e6,
    transitions_hz=(4.766e9, 4.538e9, 4.287e9, 4.005e9),
)

# residual input-line calibrations of the shipped panel configs
PUMP_LINE_OFFSET_DB = -7.1
PROBE_LINE_OFFSET_DB = 7.9
EMISSION_LINE_OFFSET_DB = -5.42


@pytest.fixture(scope="session")
def device_params() -> TransmonParams:
    return TransmonParams(**DEVICE)


@pytest.fixture(scope="session")
def device_model(device_params) -> TransmonModel:
    return TransmonModel.from_params(device_params)


@pytest.fixture(scope="session")
def device_model_no_dephasing() -> TransmonModel:
    params = TransmonParams(**{**DEVICE, "dephase_rate_hz": 0.0})
    return TransmonModel.from_params(params)


# one angular megahertz; synthetic models run at MHz scales so that solver
# thresholds tuned for laboratory magnitudes stay meaningful while time
# integration stays cheap
MRAD = TWO_PI * 1e6


def random_model(rng: np.random.Generator, max_levels: int = 6) -> TransmonModel:
    """Synthetic MHz-scale ladder; same structure as the device, fast to solve."""
    m = int(rng.integers(2, max_levels + 1))
    f10 = rng.uniform(50.0, 150.0)  # MHz
    anh = rng.uniform(2.0, f10 / (2 * m))
    transitions = tuple((f10 - anh * k) * 1e6 for k in range(m - 1))
    params = TransmonParams(
        e_c_hz=anh * 1e6,
        e_j_hz=(f10 + anh) ** 2 / (8.0 * anh) * 1e6,
        levels=m,
        relax_rate_hz=rng.uniform(0.5, 2.0) * 1e6,
        dephase_rate_hz=rng.uniform(0.0, 0.2) * 1e6,
        transitions_hz=transitions,
    )
    return TransmonModel.from_params(params)
