import math

import numpy as np
import pytest

from conftest import MRAD, PUMP_LINE_OFFSET_DB, random_model
from mirroratom import (
    PumpConfig,
    TransmonModel,
    TransmonParams,
    dressed_spectrum,
    drive_amplitude,
    find_sideband_crossing,
    idealized_sideband_count,
    sideband_catalog,
)
from mirroratom.errors import NoCrossing

TWO_PI = 2.0 * math.pi


def two_level_model(f10_hz=4.766e9, relax_hz=2.264e6):
    params = TransmonParams(
        e_c_hz=228e6, e_j_hz=13.67e9, levels=2,
        relax_rate_hz=relax_hz, dephase_rate_hz=0.0,
        transitions_hz=(f10_hz,),
    )
    return TransmonModel.from_params(params)


class TestDressedSpectrum:
    def test_zero_pump_gives_bare_rotating_frame_energies(self, device_model):
        pump = PumpConfig(omega_pump=TWO_PI * 4.530e9, amp_pump=0.0)
        spec = dressed_spectrum(device_model, pump)
        n = np.arange(device_model.dim)
        bare = np.sort(device_model.levels.omega - n * pump.omega_pump)
        assert np.allclose(spec.energies, bare, atol=1e-3)

    def test_two_level_resonant_doublet(self):
        model = two_level_model()
        amp = TWO_PI * 20e6
        pump = PumpConfig(omega_pump=model.levels.omega[1], amp_pump=amp)
        spec = dressed_spectrum(model, pump)
        assert spec.energies[0] == pytest.approx(-amp / 2.0, rel=1e-12)
        assert spec.energies[1] == pytest.approx(+amp / 2.0, rel=1e-12)

    def test_eigenpairs_are_consistent(self, device_model):
        amp = TWO_PI * 172e6
        pump = PumpConfig(omega_pump=device_model.levels.omega[3] / 3.0, amp_pump=amp)
        spec = dressed_spectrum(device_model, pump)
        from mirroratom import build_hamiltonian_drive, build_hamiltonian_static

        h = build_hamiltonian_static(device_model.levels, pump)
        h += build_hamiltonian_drive(amp, device_model.dim)
        residual = h @ spec.vectors - spec.vectors @ np.diag(spec.energies)
        assert np.abs(residual).max() < 1e-9 * np.linalg.norm(h, 2)
        gram = spec.vectors.conj().T @ spec.vectors
        assert np.abs(gram - np.eye(device_model.dim)).max() < 1e-10

    def test_continuity_in_pump_amplitude(self, device_model):
        pump_freq = device_model.levels.omega[3] / 3.0
        amps = TWO_PI * np.linspace(100e6, 200e6, 41)
        prev = None
        for amp in amps:
            spec = dressed_spectrum(device_model, PumpConfig(omega_pump=pump_freq, amp_pump=amp))
            if prev is not None:
                assert np.abs(spec.energies - prev).max() < 3.0 * (amps[1] - amps[0])
            prev = spec.energies


class TestIdealizedCount:
    def test_formula(self):
        assert idealized_sideband_count(1) == 2
        assert idealized_sideband_count(2) == 6
        assert idealized_sideband_count(3) == 12
        assert idealized_sideband_count(4) == 20
        with pytest.raises(ValueError):
            idealized_sideband_count(0)


class TestCatalog:
    def test_needs_pump(self, device_model):
        with pytest.raises(ValueError):
            sideband_catalog(device_model, PumpConfig(omega_pump=1.0, amp_pump=0.0))

    def test_entries_sorted_and_within_window(self, device_model):
        pump_freq = device_model.levels.omega[2] / 2.0
        amp = drive_amplitude(-103.0, pump_freq, device_model.rates.relax10,
                              PUMP_LINE_OFFSET_DB)
        window = (4.4e9, 4.9e9)
        catalog = sideband_catalog(
            device_model,
            PumpConfig(omega_pump=pump_freq, amp_pump=amp, n_photon=2),
            window_hz=window,
        )
        freqs = catalog.frequencies_hz()
        assert np.all(np.diff(freqs) >= 0)
        assert freqs.min() >= window[0] and freqs.max() <= window[1]

    def test_two_photon_frequencies_mirror_about_pump(self, device_model):
        # swap-partner entries D_i->D_j / D_j->D_i sit symmetrically
        pump_freq = device_model.levels.omega[2] / 2.0
        amp = drive_amplitude(-103.0, pump_freq, device_model.rates.relax10,
                              PUMP_LINE_OFFSET_DB)
        catalog = sideband_catalog(
            device_model,
            PumpConfig(omega_pump=pump_freq, amp_pump=amp, n_photon=2),
            window_hz=(4.4e9, 4.9e9),
        )
        pump_hz = pump_freq / TWO_PI
        for e in catalog.entries:
            partner = catalog.entry(e.j, e.i)
            assert (e.freq_hz - pump_hz) == pytest.approx(
                -(partner.freq_hz - pump_hz), abs=0.1e6
            )

    def test_catalog_frequencies_sit_on_response_extrema(self, device_model):
        from mirroratom import PumpedAtom

        pump_freq = device_model.levels.omega[2] / 2.0
        amp = drive_amplitude(-103.0, pump_freq, device_model.rates.relax10,
                              PUMP_LINE_OFFSET_DB)
        pump = PumpConfig(omega_pump=pump_freq, amp_pump=amp, n_photon=2)
        catalog = sideband_catalog(device_model, pump, window_hz=(4.4e9, 4.9e9))
        atom = PumpedAtom(device_model, pump)
        for e in catalog.entries:
            grid = e.freq_hz + np.arange(-3e6, 3.5e6, 0.5e6)
            mags = np.array([abs(atom.linear_reflection(TWO_PI * f)) for f in grid])
            k = np.argmax(np.abs(mags - 1.0))
            assert abs(grid[k] - e.freq_hz) <= 1.0e6


class TestCrossing:
    def test_amplified_pair_crossing_location(self, device_model):
        pump_freq_hz = device_model.levels.omega[3] / 3.0 / TWO_PI
        power, freq = find_sideband_crossing(
            device_model, pump_freq_hz, (-101.0, -90.0), (3, 4), (4, 5),
            pump_offset_db=PUMP_LINE_OFFSET_DB,
        )
        assert power == pytest.approx(-95.0, abs=1.0)
        assert freq == pytest.approx(4.739e9, abs=3e6)

    def test_crossing_deterministic_under_direction(self, device_model):
        pump_freq_hz = device_model.levels.omega[3] / 3.0 / TWO_PI
        p1, f1 = find_sideband_crossing(
            device_model, pump_freq_hz, (-101.0, -90.0), (3, 4), (4, 5),
            pump_offset_db=PUMP_LINE_OFFSET_DB,
        )
        p2, f2 = find_sideband_crossing(
            device_model, pump_freq_hz, (-90.0, -101.0), (3, 4), (4, 5),
            pump_offset_db=PUMP_LINE_OFFSET_DB,
        )
        assert abs(f1 - f2) < 10e3
        assert abs(p1 - p2) < 1e-3

    def test_parallel_sidebands_raise(self, device_model):
        pump_freq_hz = device_model.levels.omega[3] / 3.0 / TWO_PI
        with pytest.raises(NoCrossing):
            find_sideband_crossing(
                device_model, pump_freq_hz, (-120.0, -110.0), (3, 4), (4, 5),
                pump_offset_db=PUMP_LINE_OFFSET_DB,
            )
