"""Power calibration: dBm <-> watts <-> drive amplitudes.

Internally every energy is an angular frequency (hbar = 1); this module is
the only place where hbar appears. The drive amplitude Omega reaching the
atom relates to the incident carrier power P through the photon flux
|a_in|^2 = Omega^2 / (4 Gamma10), i.e. P = hbar * omega * Omega^2 / (4 Gamma10).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

HBAR = 1.054571817e-34  # J s, CODATA

GENERATOR = "generator"
SAMPLE = "sample"


def dbm_to_watts(p_dbm: float) -> float:
    """10^((p - 30)/10); 0 dBm is one milliwatt."""
    return 10.0 ** ((p_dbm - 30.0) / 10.0)


def watts_to_dbm(p_watts: float) -> float:
    if p_watts <= 0.0:
        raise ValueError("power must be positive to express in dBm")
    return 10.0 * math.log10(p_watts) + 30.0


def power_to_rabi(p_watts: float, omega_carrier: float, relax10: float) -> float:
    """Drive amplitude Omega (rad/s) for incident power P (W) at the carrier.

    Omega = 2 sqrt(Gamma10 * P / (hbar * omega)). `relax10` is the ground
    transition relaxation rate Gamma10 in rad/s.
    """
    if p_watts < 0.0:
        raise ValueError("negative power")
    if omega_carrier <= 0.0 or relax10 <= 0.0:
        raise ValueError("carrier frequency and relaxation rate must be positive")
    return 2.0 * math.sqrt(relax10 * p_watts / (HBAR * omega_carrier))


def rabi_to_power(omega_rabi: float, omega_carrier: float, relax10: float) -> float:
    """Inverse of power_to_rabi: P = hbar * omega * Omega^2 / (4 Gamma10)."""
    if omega_rabi < 0.0:
        raise ValueError("negative drive amplitude")
    return HBAR * omega_carrier * omega_rabi**2 / (4.0 * relax10)


def drive_amplitude(power_dbm: float, omega_carrier: float, relax10: float,
                    offset_db: float = 0.0) -> float:
    """Omega (rad/s) from a quoted at-sample power label.

    `offset_db` is a residual line calibration: the correction between the
    quoted at-sample dBm label and the power that actually reaches the atom.
    It is zero for physical-plane powers and nonzero only when reproducing a
    measured panel whose axis calibration is known to be offset.
    """
    return power_to_rabi(dbm_to_watts(power_dbm + offset_db), omega_carrier, relax10)


@dataclass(frozen=True)
class PowerSpec:
    """A power with its reference plane.

    Generator-plane powers need `line_attenuation_db` to be referred to the
    sample; sample-plane powers are used as-is.
    """

    value_dbm: float
    reference_plane: str = SAMPLE
    line_attenuation_db: float | None = None

    def __post_init__(self):
        if self.reference_plane not in (GENERATOR, SAMPLE):
            raise ValueError(f"unknown reference plane {self.reference_plane!r}")


def at_sample_power(spec: PowerSpec) -> PowerSpec:
    """Refer a generator-plane power to the sample plane."""
    if spec.reference_plane == SAMPLE:
        return spec
    if spec.line_attenuation_db is None:
        raise ValueError("generator-plane power without configured line attenuation")
    return replace(
        spec,
        value_dbm=spec.value_dbm - spec.line_attenuation_db,
        reference_plane=SAMPLE,
    )
