"""Multilevel atom model: level ladder, rate tables, drive Hamiltonians.

Conventions: hbar = 1, every stored frequency or rate is angular (rad/s).
Constructors take laboratory units (Hz) and convert once at the boundary.
The atom is an M-level anharmonic ladder; the pump rotating frame shifts
level n by -n * omega_pump.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

TWO_PI = 2.0 * math.pi

HARMONIC_SCALING = "harmonic"
EXPLICIT_SCALING = "explicit"


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class TransmonParams:
    """Device parameters in laboratory units.

    e_c_hz, e_j_hz       charging / Josephson energies over h, in Hz
    levels               ladder truncation M >= 2
    relax_rate_hz        ground-transition relaxation rate Gamma10 / 2pi
    dephase_rate_hz      pure dephasing rate of the first level / 2pi
    transitions_hz       optional measured adjacent transition frequencies,
                         strictly decreasing (negative anharmonicity)
    """

    e_c_hz: float
    e_j_hz: float
    levels: int = 6
    relax_rate_hz: float = 0.0
    dephase_rate_hz: float = 0.0
    transitions_hz: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.levels < 2:
            raise ValueError("need at least two levels")
        if self.e_c_hz <= 0.0 or self.e_j_hz <= 0.0:
            raise ValueError("E_C and E_J must be positive")
        if self.relax_rate_hz < 0.0 or self.dephase_rate_hz < 0.0:
            raise ValueError("rates must be nonnegative")
        if self.transitions_hz is not None:
            t = tuple(float(x) for x in self.transitions_hz)
            if any(b >= a for a, b in zip(t, t[1:])):
                raise ValueError("measured transitions must be strictly decreasing")
            if any(x <= 0.0 for x in t):
                raise ValueError("transition frequencies must be positive")
            object.__setattr__(self, "transitions_hz", t)

    @property
    def decoherence_rate_hz(self) -> float:
        """gamma10 = Gamma10/2 + Gamma1^phi, in Hz."""
        return self.relax_rate_hz / 2.0 + self.dephase_rate_hz


def extended_transitions(params: TransmonParams) -> tuple[float, ...]:
    """Measured adjacent transitions padded to M-1 entries.

    Unmeasured upper transitions continue the ladder with the anharmonic
    step -E_C per rung, the same model family that produced the lower ones.
    """
    if params.transitions_hz is None:
        raise ValueError("no measured transitions to extend")
    t = list(params.transitions_hz)
    while len(t) < params.levels - 1:
        t.append(t[-1] - params.e_c_hz)
    if t[-1] <= 0.0:
        raise ValueError("extended ladder reaches nonpositive transition frequency")
    return tuple(t)


@dataclass(frozen=True)
class LevelStructure:
    """Absolute level frequencies omega_n (rad/s), omega_0 = 0."""

    omega: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.omega, dtype=float)
        if w[0] != 0.0:
            raise ValueError("ground level must sit at zero")
        if np.any(np.diff(w) <= 0.0):
            raise ValueError("level frequencies must be strictly increasing")
        object.__setattr__(self, "omega", _readonly(w))

    @property
    def dim(self) -> int:
        return len(self.omega)

    def transition(self, n: int) -> float:
        """omega_n - omega_{n-1} (rad/s)."""
        return float(self.omega[n] - self.omega[n - 1])


def derive_level_frequencies(params: TransmonParams, mode: str = "auto") -> LevelStructure:
    """Level ladder from measured transitions or the analytic ladder.

    mode "measured" uses params.transitions_hz (length >= M-1 required),
    "analytic" the closed form omega10 = 2pi (sqrt(8 E_J E_C) - E_C) with
    adjacent transitions decreasing by E_C per rung, "auto" prefers measured
    when present.
    """
    m = params.levels
    if mode == "auto":
        mode = "measured" if params.transitions_hz is not None else "analytic"
    if mode == "measured":
        if params.transitions_hz is None or len(params.transitions_hz) < m - 1:
            raise ValueError(
                f"need at least {m - 1} measured transitions, "
                f"got {0 if params.transitions_hz is None else len(params.transitions_hz)}"
            )
        steps = np.asarray(params.transitions_hz[: m - 1], dtype=float)
    elif mode == "analytic":
        f10 = math.sqrt(8.0 * params.e_j_hz * params.e_c_hz) - params.e_c_hz
        steps = f10 - params.e_c_hz * np.arange(m - 1, dtype=float)
        if np.any(steps <= 0.0):
            raise ValueError("analytic ladder turns over within the requested levels")
    else:
        raise ValueError(f"unknown mode {mode!r}")
    omega = TWO_PI * np.concatenate(([0.0], np.cumsum(steps)))
    return LevelStructure(omega=omega)


@dataclass(frozen=True)
class RateTable:
    """Relaxation and dephasing rates per level, angular (rad/s).

    relax[n-1] is Gamma_{n,n-1}, dephase[n-1] is Gamma_n^phi, n = 1..M-1.
    """

    relax: np.ndarray
    dephase: np.ndarray

    def __post_init__(self):
        r = np.asarray(self.relax, dtype=float)
        d = np.asarray(self.dephase, dtype=float)
        if r.shape != d.shape or r.ndim != 1:
            raise ValueError("relax and dephase tables must be 1-D and equal length")
        if np.any(r < 0.0) or np.any(d < 0.0):
            raise ValueError("rates must be nonnegative")
        object.__setattr__(self, "relax", _readonly(r))
        object.__setattr__(self, "dephase", _readonly(d))

    @property
    def dim(self) -> int:
        return len(self.relax) + 1

    @property
    def relax10(self) -> float:
        return float(self.relax[0])

    @property
    def decoherence10(self) -> float:
        """Ground-transition decoherence rate gamma10 (rad/s)."""
        return float(self.relax[0] / 2.0 + self.dephase[0])


def build_rate_table(
    params: TransmonParams,
    scaling: str = HARMONIC_SCALING,
    relax_hz=None,
    dephase_hz=None,
) -> RateTable:
    """Rate table with the harmonic-ladder scaling Gamma_{n,n-1} = n Gamma10,
    Gamma_n^phi = n Gamma1^phi, or explicit user-supplied lists (Hz)."""
    m = params.levels
    n = np.arange(1, m, dtype=float)
    if scaling == HARMONIC_SCALING:
        relax = TWO_PI * params.relax_rate_hz * n
        dephase = TWO_PI * params.dephase_rate_hz * n
    elif scaling == EXPLICIT_SCALING:
        if relax_hz is None or dephase_hz is None:
            raise ValueError("explicit scaling requires relax_hz and dephase_hz lists")
        relax = TWO_PI * np.asarray(relax_hz, dtype=float)
        dephase = TWO_PI * np.asarray(dephase_hz, dtype=float)
        if len(relax) != m - 1 or len(dephase) != m - 1:
            raise ValueError(f"explicit rate lists must have length {m - 1}")
    else:
        raise ValueError(f"unknown scaling {scaling!r}")
    return RateTable(relax=relax, dephase=dephase)


@dataclass(frozen=True)
class PumpConfig:
    """Strong drive: carrier omega_pump and amplitude Omega_pump (rad/s).

    n_photon records the intended multi-photon order; it labels outputs and
    feeds the idealized sideband count, nothing else.
    """

    omega_pump: float
    amp_pump: float
    n_photon: int = 0

    def __post_init__(self):
        if self.omega_pump <= 0.0:
            raise ValueError("pump carrier must be positive")
        if self.amp_pump < 0.0:
            raise ValueError("pump amplitude must be nonnegative")

    @property
    def on(self) -> bool:
        return self.amp_pump > 0.0


@dataclass(frozen=True)
class ProbeConfig:
    """Weak tone: carrier omega_p and amplitude Omega_p (rad/s)."""

    omega_p: float
    amp_p: float

    def __post_init__(self):
        if self.omega_p <= 0.0:
            raise ValueError("probe carrier must be positive")
        if self.amp_p < 0.0:
            raise ValueError("probe amplitude must be nonnegative")

    def assert_weak(self, decoherence10: float):
        """Enforce the weak-probe regime Omega_p << gamma10 (threshold /10)."""
        if self.amp_p >= decoherence10 / 10.0:
            raise ValueError(
                f"probe amplitude {self.amp_p:.3e} rad/s is not weak against "
                f"gamma10 = {decoherence10:.3e} rad/s"
            )


@dataclass(frozen=True)
class TransmonModel:
    """Level ladder plus rate tables; the full physical description."""

    levels: LevelStructure
    rates: RateTable
    params: TransmonParams | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.levels.dim != self.rates.dim:
            raise ValueError("level and rate tables disagree on the level count")

    @classmethod
    def from_params(
        cls,
        params: TransmonParams,
        mode: str = "auto",
        scaling: str = HARMONIC_SCALING,
        relax_hz=None,
        dephase_hz=None,
        extend: bool = True,
    ) -> "TransmonModel":
        """Assemble ladder and rates; optionally pad short measured ladders."""
        if (
            extend
            and params.transitions_hz is not None
            and len(params.transitions_hz) < params.levels - 1
        ):
            params = TransmonParams(
                e_c_hz=params.e_c_hz,
                e_j_hz=params.e_j_hz,
                levels=params.levels,
                relax_rate_hz=params.relax_rate_hz,
                dephase_rate_hz=params.dephase_rate_hz,
                transitions_hz=extended_transitions(params),
            )
        levels = derive_level_frequencies(params, mode=mode)
        rates = build_rate_table(params, scaling=scaling, relax_hz=relax_hz, dephase_hz=dephase_hz)
        return cls(levels=levels, rates=rates, params=params)

    @property
    def dim(self) -> int:
        return self.levels.dim

    @property
    def decoherence10(self) -> float:
        return self.rates.decoherence10


def ladder_operator(m: int, n: int) -> np.ndarray:
    """sigma_{n,n-1} = |n><n-1|."""
    op = np.zeros((m, m), dtype=complex)
    op[n, n - 1] = 1.0
    return op


def projector(m: int, n: int) -> np.ndarray:
    """sigma_{n,n} = |n><n|."""
    op = np.zeros((m, m), dtype=complex)
    op[n, n] = 1.0
    return op


def build_hamiltonian_static(levels: LevelStructure, pump: PumpConfig) -> np.ndarray:
    """Diagonal rotating-frame term: entries omega_n - n * omega_pump."""
    n = np.arange(levels.dim, dtype=float)
    return np.diag(levels.omega - n * pump.omega_pump).astype(complex)


def build_hamiltonian_drive(amp_pump: float, m: int) -> np.ndarray:
    """Pump coupling: sqrt(n) * Omega/2 between |n> and |n-1>, both triangles."""
    if amp_pump < 0.0:
        raise ValueError("pump amplitude must be nonnegative")
    h = np.zeros((m, m), dtype=complex)
    for n in range(1, m):
        h[n, n - 1] = math.sqrt(n) * amp_pump / 2.0
        h[n - 1, n] = h[n, n - 1]
    return h


def build_probe_coupling(amp_p: float, m: int) -> tuple[np.ndarray, np.ndarray]:
    """Rotating-frame probe operators (V_plus, V_minus).

    V_plus = sum_n sqrt(n) (Omega_p/2) |n><n-1| multiplies exp(-i delta t)
    with delta = omega_p - omega_pump; V_minus is its adjoint.
    """
    if amp_p < 0.0:
        raise ValueError("probe amplitude must be nonnegative")
    v_plus = np.zeros((m, m), dtype=complex)
    for n in range(1, m):
        v_plus[n, n - 1] = math.sqrt(n) * amp_p / 2.0
    return v_plus, v_plus.conj().T
