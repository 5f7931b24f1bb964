"""Pump-probe simulator for a multilevel artificial atom terminating a
semi-infinite waveguide: reflection spectra, dressed-state sideband
catalogs, saturation curves, emission spectra, and spectroscopic fits."""

__version__ = "0.1.0"

from .calibration import (
    HBAR,
    PowerSpec,
    at_sample_power,
    dbm_to_watts,
    drive_amplitude,
    power_to_rabi,
    rabi_to_power,
    watts_to_dbm,
)
from .dressed import (
    DressedSpectrum,
    SidebandCatalog,
    SidebandEntry,
    dressed_spectrum,
    find_sideband_crossing,
    idealized_sideband_count,
    sideband_catalog,
)
from .emission import SpectrumResult, emission_spectrum, output_field_operator, total_incoherent_flux
from .fitting import (
    FitReport,
    ReflectionTrace,
    SaturationFit,
    fit_circle,
    fit_power_saturation,
    model_weak_reflection,
    saturation_curve,
)
from .liouville import (
    ARITHMETIC_MEAN,
    GEOMETRIC_MEAN,
    DensityState,
    Superoperator,
    build_dissipator,
    build_liouvillian,
    evolve,
    expectation,
    lindblad_cross_term,
    steady_state,
)
from .model import (
    LevelStructure,
    ProbeConfig,
    PumpConfig,
    RateTable,
    TransmonModel,
    TransmonParams,
    build_hamiltonian_drive,
    build_hamiltonian_static,
    build_probe_coupling,
    build_rate_table,
    derive_level_frequencies,
    extended_transitions,
)
from .reflection import (
    PeakInfo,
    PumpedAtom,
    ReflectionPoint,
    analyze_peak,
    harmonic_balance_reflection,
    linear_response_reflection,
    reflection_from_coherences,
    single_tone_reflection,
)
from .sweep import SweepResult, reflection_sweep, saturation_sweep
