"""Spectroscopic parameter extraction from reflection traces.

A weak resonant probe traces a circle in the complex plane:

    r(delta) = 1 - Gamma10 / (gamma10 - i delta),   delta = omega - omega10,

center 1 - Gamma10/(2 gamma10), radius Gamma10/(2 gamma10). The fit runs in
two stages: an algebraic circle fit pins the radius (the rate ratio), then
a nonlinear fit of the phase profile around the circle center pins omega10
and gamma10. Saturation of the on-resonance dip over probe power pins
Gamma10 absolutely; with no pure dephasing the dip touches zero at the
incident power hbar omega10 Gamma10 / 8.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import least_squares

from . import calibration
from .errors import DegenerateCircle, NoMinimum, PoorFit
from .model import ProbeConfig, RateTable, LevelStructure, TransmonModel
from .reflection import single_tone_reflection

TWO_PI = 2.0 * math.pi

POOR_FIT_THRESHOLD = 0.05
DEGENERATE_RADIUS = 1e-3


def model_weak_reflection(freq_hz, f10_hz, relax_hz, decoherence_hz):
    """Weak-probe reflection r(f) = 1 - Gamma10 / (gamma10 - i (f - f10)).

    Rates and detunings enter only as ratios, so plain Hz throughout.
    """
    delta = np.asarray(freq_hz, dtype=float) - f10_hz
    return 1.0 - relax_hz / (decoherence_hz - 1j * delta)


@dataclass(frozen=True)
class ReflectionTrace:
    """Measured or synthetic complex reflection versus frequency."""

    freq_hz: np.ndarray
    r: np.ndarray
    probe_power_dbm: float | None = None

    def __post_init__(self):
        f = np.asarray(self.freq_hz, dtype=float)
        r = np.asarray(self.r, dtype=complex)
        if f.ndim != 1 or f.shape != r.shape:
            raise ValueError("trace needs matching 1-D frequency and reflection arrays")
        if len(f) > 1 and not (np.all(np.diff(f) > 0) or np.all(np.diff(f) < 0)):
            raise ValueError("frequency grid must be strictly monotone")
        if not (np.all(np.isfinite(f)) and np.all(np.isfinite(r))):
            raise ValueError("trace contains non-finite values")
        object.__setattr__(self, "freq_hz", f)
        object.__setattr__(self, "r", r)

    @classmethod
    def from_csv(cls, path, probe_power_dbm=None) -> "ReflectionTrace":
        """Load (freq_hz, re, im) or (freq_hz, mag_db, phase_deg) columns."""
        with open(path, newline="") as fh:
            reader = csv.reader(row for row in fh if not row.startswith("#"))
            header = next(reader)
            cols = [c.strip().lower() for c in header]
            rows = [[float(x) for x in row] for row in reader if row]
        if not rows:
            raise ValueError(f"no data rows in {path}")
        data = np.asarray(rows)
        if cols[:3] == ["freq_hz", "re", "im"]:
            r = data[:, 1] + 1j * data[:, 2]
        elif cols[:3] == ["freq_hz", "mag_db", "phase_deg"]:
            mag = 10.0 ** (data[:, 1] / 20.0)
            r = mag * np.exp(1j * np.deg2rad(data[:, 2]))
        else:
            raise ValueError(
                "expected columns (freq_hz, re, im) or (freq_hz, mag_db, phase_deg), "
                f"got {cols}"
            )
        return cls(freq_hz=data[:, 0], r=r, probe_power_dbm=probe_power_dbm)


@dataclass(frozen=True)
class FitReport:
    omega10_hz: float
    relax_rate_hz: float        # Gamma10 / 2pi
    decoherence_rate_hz: float  # gamma10 / 2pi
    dephase_rate_hz: float      # Gamma1^phi / 2pi, derived
    residual: float
    stderr_omega10_hz: float = math.nan
    stderr_decoherence_hz: float = math.nan

    def as_rows(self):
        return [
            ("omega10_hz", self.omega10_hz),
            ("relax_rate_hz", self.relax_rate_hz),
            ("decoherence_rate_hz", self.decoherence_rate_hz),
            ("dephase_rate_hz", self.dephase_rate_hz),
            ("residual", self.residual),
            ("stderr_omega10_hz", self.stderr_omega10_hz),
            ("stderr_decoherence_hz", self.stderr_decoherence_hz),
        ]


def _algebraic_circle_fit(z: np.ndarray) -> tuple[complex, float]:
    """Least-squares circle through complex points (Kasa normal equations)."""
    x, y = z.real, z.imag
    a = np.column_stack([x, y, np.ones_like(x)])
    b = x**2 + y**2
    coef, *_ = np.linalg.lstsq(a, b, rcond=None)
    cx, cy = coef[0] / 2.0, coef[1] / 2.0
    r2 = coef[2] + cx**2 + cy**2
    if r2 <= 0.0:
        raise DegenerateCircle("circle fit collapsed")
    return complex(cx, cy), math.sqrt(r2)


def fit_circle(trace: ReflectionTrace) -> FitReport:
    """Extract (omega10, Gamma10, gamma10) from a weak-probe trace."""
    z = trace.r
    spread = float(np.abs(z - z.mean()).max())
    if spread < DEGENERATE_RADIUS:
        raise DegenerateCircle(f"trace spread {spread:.2e}; no atomic response")
    center, radius = _algebraic_circle_fit(z)
    if radius < DEGENERATE_RADIUS:
        raise DegenerateCircle(f"circle radius {radius:.2e}; no atomic response")

    # phase around the center: theta(f) = theta0 + 2 atan((f - f10) / gamma10)
    theta = np.unwrap(np.angle(z - center))
    f = trace.freq_hz
    f10_guess = float(f[np.argmin(np.abs(z - (center - radius * np.exp(1j * 0))))])
    # better start: steepest phase slope
    slope = np.gradient(theta, f)
    f10_guess = float(f[np.argmax(np.abs(slope))])
    gamma_guess = max((f.max() - f.min()) / 20.0, 1.0)

    def residuals(p):
        theta0, f10, gamma = p
        return theta0 + 2.0 * np.arctan((f - f10) / gamma) - theta

    fit = least_squares(
        residuals,
        x0=[float(np.median(theta)), f10_guess, gamma_guess],
        method="lm",
        max_nfev=20000,
    )
    theta0, f10, gamma = fit.x
    gamma = abs(gamma)
    relax = 2.0 * radius * gamma

    model = model_weak_reflection(f, f10, relax, gamma)
    residual = float(np.linalg.norm(model - z) / np.linalg.norm(z))
    if residual > POOR_FIT_THRESHOLD:
        raise PoorFit(f"relative residual {residual:.3f} above {POOR_FIT_THRESHOLD}")

    stderr_f10 = stderr_gamma = math.nan
    try:
        jtj = fit.jac.T @ fit.jac
        dof = max(len(f) - 3, 1)
        cov = np.linalg.inv(jtj) * 2.0 * fit.cost / dof
        stderr_f10 = float(math.sqrt(abs(cov[1, 1])))
        stderr_gamma = float(math.sqrt(abs(cov[2, 2])))
    except np.linalg.LinAlgError:
        pass

    return FitReport(
        omega10_hz=float(f10),
        relax_rate_hz=float(relax),
        decoherence_rate_hz=float(gamma),
        dephase_rate_hz=float(gamma - relax / 2.0),
        residual=residual,
        stderr_omega10_hz=stderr_f10,
        stderr_decoherence_hz=stderr_gamma,
    )


@dataclass(frozen=True)
class SaturationFit:
    relax_rate_hz: float
    min_power_dbm: float
    residual: float


def _two_level_model(f10_hz: float, relax_rate_hz: float, decoherence_ratio: float) -> TransmonModel:
    relax = TWO_PI * relax_rate_hz
    dephase = relax * (decoherence_ratio - 0.5)
    levels = LevelStructure(omega=np.array([0.0, TWO_PI * f10_hz]))
    rates = RateTable(relax=np.array([relax]), dephase=np.array([max(dephase, 0.0)]))
    return TransmonModel(levels=levels, rates=rates)


def saturation_curve(
    powers_dbm, f10_hz: float, relax_rate_hz: float, decoherence_ratio: float = 0.5
) -> np.ndarray:
    """|r| of a resonant probe versus power for a two-level reduction."""
    model = _two_level_model(f10_hz, relax_rate_hz, decoherence_ratio)
    omega10 = TWO_PI * f10_hz
    out = np.empty(len(powers_dbm))
    for k, p in enumerate(powers_dbm):
        amp = calibration.drive_amplitude(p, omega10, model.rates.relax10)
        probe = ProbeConfig(omega_p=omega10, amp_p=amp)
        out[k] = single_tone_reflection(model, probe).magnitude
    return out


def fit_power_saturation(
    powers_dbm,
    r_mag,
    f10_hz: float,
    decoherence_ratio: float = 0.5,
) -> SaturationFit:
    """Fit Gamma10 to an on-resonance saturation curve.

    `decoherence_ratio` is the prior gamma10/Gamma10 (0.5 for no pure
    dephasing). Needs data bracketing the |r| minimum.
    """
    p = np.asarray(powers_dbm, dtype=float)
    y = np.asarray(r_mag, dtype=float)
    if len(p) < 8:
        raise ValueError("need at least eight powers bracketing the minimum")
    i_min = int(np.argmin(y))
    if i_min == 0 or i_min == len(y) - 1:
        raise NoMinimum("reflection magnitude is monotone over the power range")

    def residuals(log_rate):
        return saturation_curve(p, f10_hz, math.exp(log_rate[0]), decoherence_ratio) - y

    # the dip power scales linearly with Gamma10: anchor the start there
    guess = calibration.dbm_to_watts(p[i_min]) * 8.0 / (
        calibration.HBAR * TWO_PI * f10_hz
    ) / TWO_PI
    fit = least_squares(residuals, x0=[math.log(guess)], method="lm", max_nfev=200)
    rate = math.exp(fit.x[0])
    resid = float(np.linalg.norm(fit.fun) / max(np.linalg.norm(y), 1e-300))

    fine = np.linspace(p.min(), p.max(), 2001)
    curve = saturation_curve(fine, f10_hz, rate, decoherence_ratio)
    return SaturationFit(
        relax_rate_hz=rate,
        min_power_dbm=float(fine[np.argmin(curve)]),
        residual=resid,
    )
