import math

import numpy as np
import pytest

from conftest import PUMP_LINE_OFFSET_DB
from mirroratom import PumpConfig, drive_amplitude, linear_response_reflection, reflection_sweep
from mirroratom.sweep import FLAG_DEGENERATE_DETUNING, FLAG_OK, saturation_sweep

TWO_PI = 2.0 * math.pi


def test_single_cell_matches_point_operation(device_model):
    pump_freq = device_model.levels.omega[3] / 3.0
    result = reflection_sweep(
        device_model,
        pump_freq_hz=pump_freq / TWO_PI,
        pump_powers_dbm=[-95.0],
        probe_freqs_hz=[4.738e9],
        pump_offset_db=PUMP_LINE_OFFSET_DB,
        workers=1,
    )
    amp = drive_amplitude(-95.0, pump_freq, device_model.rates.relax10, PUMP_LINE_OFFSET_DB)
    pump = PumpConfig(omega_pump=pump_freq, amp_pump=amp)
    point = linear_response_reflection(device_model, pump, TWO_PI * 4.738e9)
    assert result.values[0, 0] == pytest.approx(point.r, rel=1e-12)
    assert result.flags[0, 0] == FLAG_OK


def test_worker_count_does_not_change_results(device_model):
    pump_freq_hz = device_model.levels.omega[3] / 3.0 / TWO_PI
    kwargs = dict(
        pump_freq_hz=pump_freq_hz,
        pump_powers_dbm=np.arange(-100.0, -93.9, 2.0),
        probe_freqs_hz=np.arange(4.730e9, 4.745e9, 5e6),
        pump_offset_db=PUMP_LINE_OFFSET_DB,
    )
    serial = reflection_sweep(device_model, workers=1, **kwargs)
    parallel = reflection_sweep(device_model, workers=3, **kwargs)
    assert np.array_equal(serial.values, parallel.values)
    assert np.array_equal(serial.flags, parallel.flags)


def test_degenerate_cells_are_flagged_not_fatal(device_model):
    pump_freq_hz = device_model.levels.omega[3] / 3.0 / TWO_PI
    freqs = [pump_freq_hz - 20e6, pump_freq_hz, pump_freq_hz + 20e6]
    result = reflection_sweep(
        device_model,
        pump_freq_hz=pump_freq_hz,
        pump_powers_dbm=[-100.0],
        probe_freqs_hz=freqs,
        pump_offset_db=PUMP_LINE_OFFSET_DB,
        workers=1,
    )
    assert result.flags[0, 1] == FLAG_DEGENERATE_DETUNING
    assert np.isnan(result.values[0, 1].real)
    assert result.flags[0, 0] == FLAG_OK and result.flags[0, 2] == FLAG_OK
    assert result.flagged


def test_axis_validation(device_model):
    with pytest.raises(ValueError, match="empty sweep axis"):
        reflection_sweep(device_model, 4.53e9, [], [4.7e9], workers=1)
    with pytest.raises(ValueError, match="monotone"):
        reflection_sweep(device_model, 4.53e9, [-100.0, -100.0], [4.7e9], workers=1)


def test_saturation_sweep_shape_and_monotone_scale(device_model):
    pump_freq = device_model.levels.omega[3] / 3.0
    amp = drive_amplitude(-95.0, pump_freq, device_model.rates.relax10, PUMP_LINE_OFFSET_DB)
    pump = PumpConfig(omega_pump=pump_freq, amp_pump=amp, n_photon=3)
    result = saturation_sweep(
        device_model,
        pump,
        probe_powers_dbm=[-161.0, -131.0],
        probe_freqs_hz=[4.738e9],
        workers=1,
    )
    assert result.values.shape == (2, 1)
    assert result.magnitude[0, 0] > result.magnitude[1, 0] > 1.0
