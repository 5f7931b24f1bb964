"""Grid sweeps of the reflection coefficient with a worker pool.

Work is sharded by power setting: each shard builds one pump (or probe
power) operating point and walks the probe-frequency axis. Shards are
embarrassingly parallel; results land in preallocated arrays indexed by
grid position, so the output is identical for any worker count. Failed
cells are flagged in-band and never abort the sweep.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from multiprocessing import get_context

import numpy as np

from . import calibration
from .errors import (
    DegenerateDetuning,
    EngineError,
    HarmonicTruncationNotConverged,
    NonUniqueSteadyState,
    SolverFailure,
)
from .liouville import GEOMETRIC_MEAN
from .model import ProbeConfig, PumpConfig, TransmonModel
from .reflection import (
    DEFAULT_CUTOFF,
    HARMONIC_BALANCE,
    LINEAR_RESPONSE,
    PumpedAtom,
)

TWO_PI = 2.0 * math.pi

WORKERS_ENV = "MIRRORATOM_WORKERS"

FLAG_OK = 0
FLAG_DEGENERATE_DETUNING = 1
FLAG_NOT_CONVERGED = 2
FLAG_NO_STEADY_STATE = 3
FLAG_SOLVER = 4

_FLAG_FOR = {
    DegenerateDetuning: FLAG_DEGENERATE_DETUNING,
    HarmonicTruncationNotConverged: FLAG_NOT_CONVERGED,
    NonUniqueSteadyState: FLAG_NO_STEADY_STATE,
    SolverFailure: FLAG_SOLVER,
}


def _flag_code(exc: Exception) -> int:
    for cls, code in _FLAG_FOR.items():
        if isinstance(exc, cls):
            return code
    return FLAG_SOLVER


@dataclass(frozen=True)
class SweepResult:
    """Reflection over a labeled grid.

    values has shape (len(axis2), len(axis1)); axis1 is probe frequency in
    Hz, axis2 a power axis in dBm (None collapses to a single row). flags
    carries per-cell error codes, 0 for clean cells.
    """

    axis1_hz: np.ndarray
    axis2_dbm: np.ndarray | None
    values: np.ndarray
    flags: np.ndarray
    metadata: dict = field(default_factory=dict)

    @property
    def magnitude(self) -> np.ndarray:
        return np.abs(self.values)

    @property
    def flagged(self) -> bool:
        return bool(np.any(self.flags != FLAG_OK))

    def row(self, power_dbm: float) -> np.ndarray:
        if self.axis2_dbm is None:
            raise ValueError("sweep has no power axis")
        i = int(np.argmin(np.abs(self.axis2_dbm - power_dbm)))
        return self.values[i]


def resolve_workers(workers: int | None) -> int:
    """Worker count: explicit argument, else environment, else all cores."""
    if workers is not None and workers > 0:
        return workers
    env = os.environ.get(WORKERS_ENV)
    if env:
        try:
            n = int(env)
            if n > 0:
                return n
        except ValueError:
            pass
    return os.cpu_count() or 1


def _check_axis(axis, name):
    a = np.asarray(axis, dtype=float)
    if a.size == 0:
        raise ValueError(f"empty sweep axis: {name}")
    if a.size > 1 and not (np.all(np.diff(a) > 0) or np.all(np.diff(a) < 0)):
        raise ValueError(f"sweep axis {name} must be strictly monotone")
    return a


def _reflection_shard(task):
    """One pump power: steady state once, then every probe frequency."""
    (model, pump_freq_hz, power_dbm, pump_offset_db, n_photon, probe_freqs,
     method, probe_amp, cutoff, cross_mode) = task
    n1 = len(probe_freqs)
    values = np.full(n1, np.nan + 0j, dtype=complex)
    flags = np.zeros(n1, dtype=np.uint8)
    omega_pump = TWO_PI * pump_freq_hz
    amp = calibration.drive_amplitude(
        power_dbm, omega_pump, model.rates.relax10, pump_offset_db
    )
    pump = PumpConfig(omega_pump=omega_pump, amp_pump=amp, n_photon=n_photon)
    try:
        atom = PumpedAtom(model, pump, cross_mode)
    except EngineError as exc:
        flags[:] = _flag_code(exc)
        return values, flags
    for i, f in enumerate(probe_freqs):
        omega_p = TWO_PI * f
        try:
            if method == LINEAR_RESPONSE:
                values[i] = atom.linear_reflection(omega_p)
            else:
                if probe_amp is None:
                    raise ValueError("harmonic sweeps need a probe power")
                values[i], _ = atom.harmonic_reflection(omega_p, probe_amp, cutoff)
        except EngineError as exc:
            flags[i] = _flag_code(exc)
    return values, flags


def _saturation_shard(task):
    """One probe power along the probe-frequency axis, harmonic balance."""
    (model, pump, probe_power_dbm, probe_offset_db, probe_freqs, cutoff,
     cross_mode) = task
    n1 = len(probe_freqs)
    values = np.full(n1, np.nan + 0j, dtype=complex)
    flags = np.zeros(n1, dtype=np.uint8)
    try:
        atom = PumpedAtom(model, pump, cross_mode)
    except EngineError as exc:
        flags[:] = _flag_code(exc)
        return values, flags
    for i, f in enumerate(probe_freqs):
        omega_p = TWO_PI * f
        amp = calibration.drive_amplitude(
            probe_power_dbm, omega_p, model.rates.relax10, probe_offset_db
        )
        try:
            values[i], _ = atom.harmonic_reflection(omega_p, amp, cutoff)
        except EngineError as exc:
            flags[i] = _flag_code(exc)
    return values, flags


def _run_shards(shard_fn, tasks, workers):
    if workers <= 1 or len(tasks) <= 1:
        return [shard_fn(t) for t in tasks]
    ctx = get_context("fork") if hasattr(os, "fork") else get_context("spawn")
    with ctx.Pool(min(workers, len(tasks))) as pool:
        return pool.map(shard_fn, tasks)


def reflection_sweep(
    model: TransmonModel,
    pump_freq_hz: float,
    pump_powers_dbm,
    probe_freqs_hz,
    method: str = LINEAR_RESPONSE,
    probe_power_dbm: float | None = None,
    pump_offset_db: float = 0.0,
    probe_offset_db: float = 0.0,
    n_photon: int = 0,
    cutoff: int = DEFAULT_CUTOFF,
    cross_mode: str = GEOMETRIC_MEAN,
    workers: int | None = None,
) -> SweepResult:
    """|r| over (pump power, probe frequency)."""
    powers = _check_axis(pump_powers_dbm, "pump power")
    freqs = _check_axis(probe_freqs_hz, "probe frequency")
    if method not in (LINEAR_RESPONSE, HARMONIC_BALANCE):
        raise ValueError(f"unknown sweep method {method!r}")
    probe_amp = None
    if method == HARMONIC_BALANCE:
        if probe_power_dbm is None:
            raise ValueError("harmonic sweeps need a probe power")
        # nominal amplitude at the pump carrier; per-point refinement is
        # below the harmonic-balance truncation error for these spans
        probe_amp = calibration.drive_amplitude(
            probe_power_dbm, TWO_PI * pump_freq_hz, model.rates.relax10, probe_offset_db
        )
    tasks = [
        (model, pump_freq_hz, p, pump_offset_db, n_photon, freqs, method,
         probe_amp, cutoff, cross_mode)
        for p in powers
    ]
    results = _run_shards(_reflection_shard, tasks, resolve_workers(workers))
    values = np.stack([v for v, _ in results])
    flags = np.stack([f for _, f in results])
    return SweepResult(
        axis1_hz=freqs,
        axis2_dbm=powers,
        values=values,
        flags=flags,
        metadata={
            "kind": "reflection",
            "method": method,
            "pump_freq_hz": pump_freq_hz,
            "pump_offset_db": pump_offset_db,
            "probe_power_dbm": probe_power_dbm,
            "probe_offset_db": probe_offset_db,
            "cross_mode": cross_mode,
            "cutoff": cutoff,
            "n_photon": n_photon,
        },
    )


def saturation_sweep(
    model: TransmonModel,
    pump: PumpConfig,
    probe_powers_dbm,
    probe_freqs_hz,
    probe_offset_db: float = 0.0,
    cutoff: int = DEFAULT_CUTOFF,
    cross_mode: str = GEOMETRIC_MEAN,
    workers: int | None = None,
) -> SweepResult:
    """|r| over (probe power, probe frequency) at a fixed pump."""
    powers = _check_axis(probe_powers_dbm, "probe power")
    freqs = _check_axis(probe_freqs_hz, "probe frequency")
    tasks = [
        (model, pump, p, probe_offset_db, freqs, cutoff, cross_mode)
        for p in powers
    ]
    results = _run_shards(_saturation_shard, tasks, resolve_workers(workers))
    values = np.stack([v for v, _ in results])
    flags = np.stack([f for _, f in results])
    return SweepResult(
        axis1_hz=freqs,
        axis2_dbm=powers,
        values=values,
        flags=flags,
        metadata={
            "kind": "saturation",
            "method": HARMONIC_BALANCE,
            "pump_freq_hz": pump.omega_pump / TWO_PI,
            "pump_amp_rad": pump.amp_pump,
            "probe_offset_db": probe_offset_db,
            "cross_mode": cross_mode,
            "cutoff": cutoff,
        },
    )
