"""Incoherent emission spectrum of the pumped atom.

Two-time correlations follow from the single-time generator (quantum
regression): with c the collective decay operator and dc = c - <c>_ss its
fluctuation, the one-sided transform of <dc^dag(tau) dc(0)>_ss is one
resolvent solve per frequency,

    S(f) = 2 Re vec(dc)^dag (i (omega - omega_pump) Id - L0)^(-1) vec(dc rho_ss),

a photon-flux density per Hz in the lab frame: integrating S df over the
band recovers the incoherent flux <dc^dag dc>_ss. Subtracting <c>_ss
removes the elastic line at the pump carrier.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .liouville import GEOMETRIC_MEAN, vectorize
from .model import PumpConfig, RateTable, TransmonModel
from .reflection import PumpedAtom

TWO_PI = 2.0 * math.pi

log = logging.getLogger(__name__)


def output_field_operator(rates: RateTable) -> np.ndarray:
    """Atomic part of the outgoing field: c = sum_n sqrt(Gamma_n) |n-1><n|."""
    m = rates.dim
    c = np.zeros((m, m), dtype=complex)
    for n in range(1, m):
        c[n - 1, n] = math.sqrt(rates.relax[n - 1])
    return c


@dataclass(frozen=True)
class SpectrumResult:
    """Photon-flux spectral density over a lab-frame frequency grid."""

    freq_hz: np.ndarray
    density: np.ndarray  # photons / s / Hz
    pump: PumpConfig
    metadata: dict = field(default_factory=dict, compare=False)

    def integrated_flux(self) -> float:
        """Quadrature of the density over the grid (photons/s)."""
        return float(np.trapezoid(self.density, self.freq_hz))

    def local_maxima(self, min_height_frac: float = 0.0) -> list[tuple[float, float]]:
        """(freq, density) of interior local maxima above a height fraction."""
        y = self.density
        floor = min_height_frac * y.max() if y.size else 0.0
        out = []
        for i in range(1, len(y) - 1):
            if y[i] > y[i - 1] and y[i] > y[i + 1] and y[i] >= floor:
                out.append((float(self.freq_hz[i]), float(y[i])))
        return out


def emission_spectrum(
    model: TransmonModel,
    pump: PumpConfig,
    freq_hz,
    cross_mode: str = GEOMETRIC_MEAN,
) -> SpectrumResult:
    """Incoherent emission density on the given lab-frame grid (Hz)."""
    freqs = np.asarray(freq_hz, dtype=float)
    if freqs.size == 0 or (freqs.size > 1 and np.any(np.diff(freqs) <= 0.0)):
        raise ValueError("frequency grid must be nonempty and increasing")
    if not pump.on:
        return SpectrumResult(
            freq_hz=freqs,
            density=np.zeros_like(freqs),
            pump=pump,
            metadata={"cross_mode": cross_mode},
        )
    atom = PumpedAtom(model, pump, cross_mode)
    c_op = output_field_operator(model.rates)
    c_mean = np.trace(c_op @ atom.rho_ss.matrix)
    dc = c_op - c_mean * np.eye(model.dim)
    b = vectorize(dc @ atom.rho_ss.matrix)
    w = vectorize(dc)
    liouv = atom.liouvillian.matrix.tocsc()
    identity = sp.identity(model.dim**2, format="csc")
    floor = 1e-6 * model.rates.relax10
    density = np.empty_like(freqs)
    regularized = 0
    for k, f in enumerate(freqs):
        d_omega = TWO_PI * f - pump.omega_pump
        shift = 1j * d_omega
        if abs(d_omega) < floor:
            # the generator's stationary mode sits at zero; nudge off it
            shift += floor
            regularized += 1
        x = spla.spsolve((shift * identity - liouv).tocsc(), b)
        density[k] = 2.0 * np.real(np.vdot(w, x))
    if regularized:
        log.warning(
            "emission resolvent regularized at %d grid point(s) near the pump carrier",
            regularized,
        )
    return SpectrumResult(
        freq_hz=freqs,
        density=density,
        pump=pump,
        metadata={"cross_mode": cross_mode, "regularized_points": regularized},
    )


def total_incoherent_flux(
    model: TransmonModel, pump: PumpConfig, cross_mode: str = GEOMETRIC_MEAN
) -> float:
    """Stationary <dc^dag dc>; equals the integral of the emission density."""
    if not pump.on:
        return 0.0
    atom = PumpedAtom(model, pump, cross_mode)
    c_op = output_field_operator(model.rates)
    rho = atom.rho_ss.matrix
    c_mean = np.trace(c_op @ rho)
    return float(np.real(np.trace(c_op.conj().T @ c_op @ rho)) - abs(c_mean) ** 2)
