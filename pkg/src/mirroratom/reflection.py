"""Probe reflection under simultaneous pump and probe.

The probe enters the master equation at the beat detuning
delta = omega_p - omega_pump. Three evaluation routes:

* linear response -- first order in the probe amplitude, one resolvent
  solve per frequency, exact in the weak-probe limit and independent of
  the nominal probe amplitude;
* harmonic balance -- truncated Fourier expansion of the periodically
  driven state, valid at any probe power;
* single tone -- probe only, stationary in its own rotating frame.

The outgoing/incoming amplitude ratio is assembled from the first-harmonic
ladder coherences; combining the input-output relation with the classical
input normalization gives

    r = 1 - 2i sum_n sqrt(Gamma10 Gamma_n) <sigma_{n-1,n}>_1 / Omega_p.

The prefactor 2 is what places the single-tone |r| = 0 crossing at the
incident power hbar omega10 Gamma10 / 8; a variant with prefactor 1 is kept
behind `io_prefactor` for side-by-side comparison.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import DegenerateDetuning, HarmonicTruncationNotConverged
from .liouville import (
    GEOMETRIC_MEAN,
    DensityState,
    Superoperator,
    build_dissipator,
    build_liouvillian,
    steady_state,
    unvectorize,
    vectorize,
)
from .model import (
    ProbeConfig,
    PumpConfig,
    TransmonModel,
    build_hamiltonian_drive,
    build_hamiltonian_static,
    build_probe_coupling,
    ladder_operator,
)
from .errors import NoPeak

TWO_PI = 2.0 * math.pi

LINEAR_RESPONSE = "linear"
HARMONIC_BALANCE = "harmonic"
SINGLE_TONE = "single_tone"

MIN_DETUNING = TWO_PI * 1e3  # rad/s; below this the resolvent is treated as singular
DEFAULT_CUTOFF = 9
MAX_CUTOFF = 25
CONVERGENCE_TOL = 1e-4


@dataclass(frozen=True)
class ReflectionPoint:
    """Complex reflection coefficient at one probe frequency."""

    omega_p: float
    r: complex
    method: str

    @property
    def magnitude(self) -> float:
        return abs(self.r)


def reflection_from_coherences(
    coherences, rates, amp_p: float, io_prefactor: float = 2.0
) -> complex:
    """r from the first-harmonic ladder coherences <sigma_{n-1,n}>_1."""
    if amp_p <= 0.0:
        raise ValueError("probe amplitude must be positive")
    coh = np.asarray(coherences, dtype=complex)
    weights = np.sqrt(rates.relax10 * rates.relax)
    if len(coh) != len(weights):
        raise ValueError("one coherence per ladder transition expected")
    return 1.0 - 1j * io_prefactor * np.sum(weights * coh) / amp_p


class PumpedAtom:
    """One pump operating point: generator, stationary state, probe couplings.

    Precomputes everything that does not depend on the probe frequency so a
    sweep pays one steady-state solve per pump setting and one sparse
    factorization per probe point.
    """

    def __init__(self, model: TransmonModel, pump: PumpConfig,
                 cross_mode: str = GEOMETRIC_MEAN):
        self.model = model
        self.pump = pump
        self.cross_mode = cross_mode
        m = model.dim
        h = build_hamiltonian_static(model.levels, pump)
        h += build_hamiltonian_drive(pump.amp_pump, m)
        self.hamiltonian = h
        self.liouvillian: Superoperator = build_liouvillian(
            h, build_dissipator(model.rates, cross_mode)
        )
        self.rho_ss: DensityState = steady_state(self.liouvillian)
        v_plus, _ = build_probe_coupling(1.0, m)  # per unit probe amplitude
        self._v_unit = v_plus
        self._lowering = [ladder_operator(m, n).conj().T for n in range(1, m)]
        self._identity = sp.identity(m * m, format="csr")

    def _first_harmonic_coherences(self, rho1: np.ndarray) -> np.ndarray:
        return np.array([np.trace(op @ rho1) for op in self._lowering])

    def detuning(self, omega_p: float) -> float:
        delta = omega_p - self.pump.omega_pump
        if abs(delta) < MIN_DETUNING:
            raise DegenerateDetuning(
                f"probe within {MIN_DETUNING / TWO_PI:.0f} Hz of the pump carrier"
            )
        return delta

    def linear_reflection(self, omega_p: float, io_prefactor: float = 2.0) -> complex:
        """First-order probe response; independent of the probe amplitude."""
        delta = self.detuning(omega_p)
        rhs = 1j * (self._v_unit @ self.rho_ss.matrix - self.rho_ss.matrix @ self._v_unit)
        a = (self.liouvillian.matrix + 1j * delta * self._identity).tocsc()
        rho1 = unvectorize(spla.spsolve(a, vectorize(rhs)), self.model.dim)
        coh = self._first_harmonic_coherences(rho1)
        # rho1 is the response per unit probe amplitude, so Omega_p = 1 here
        return reflection_from_coherences(coh, self.model.rates, 1.0, io_prefactor)

    def _harmonic_solve(self, amp_p: float, delta: float, cutoff: int) -> np.ndarray:
        """Fourier components rho_k, k = -K..K; returns the k = +1 block."""
        m = self.model.dim
        n = m * m
        v_plus = amp_p * self._v_unit
        v_minus = v_plus.conj().T
        c_plus = -1j * (sp.kron(sp.identity(m), sp.csr_matrix(v_plus))
                        - sp.kron(sp.csr_matrix(v_plus.T), sp.identity(m)))
        c_minus = -1j * (sp.kron(sp.identity(m), sp.csr_matrix(v_minus))
                         - sp.kron(sp.csr_matrix(v_minus.T), sp.identity(m)))
        blocks = 2 * cutoff + 1
        rows = []
        for bi, k in enumerate(range(-cutoff, cutoff + 1)):
            row = [None] * blocks
            row[bi] = self.liouvillian.matrix + 1j * k * delta * self._identity
            if bi > 0:
                row[bi - 1] = c_plus
            if bi < blocks - 1:
                row[bi + 1] = c_minus
            rows.append(row)
        a = sp.bmat(rows, format="lil")
        # normalization: replace one k = 0 equation by Tr(rho_0) = 1
        k0 = cutoff
        row = k0 * n
        a.rows[row] = list(k0 * n + np.arange(m) * (m + 1))
        a.data[row] = [1.0] * m
        b = np.zeros(blocks * n, dtype=complex)
        b[row] = 1.0
        x = spla.spsolve(a.tocsc(), b)
        return unvectorize(x[(k0 + 1) * n : (k0 + 2) * n], m)

    def harmonic_reflection(
        self,
        omega_p: float,
        amp_p: float,
        cutoff: int = DEFAULT_CUTOFF,
        auto_escalate: bool = True,
        io_prefactor: float = 2.0,
    ) -> tuple[complex, int]:
        """Nonperturbative reflection; returns (r, cutoff actually used).

        Convergence requires |r(K)| and |r(K+2)| to agree within 1e-4; on
        failure the cutoff doubles until MAX_CUTOFF.
        """
        if cutoff < 1:
            raise ValueError("cutoff must be at least 1")
        if amp_p <= 0.0:
            raise ValueError("probe amplitude must be positive")
        delta = self.detuning(omega_p)

        def r_at(k):
            rho1 = self._harmonic_solve(amp_p, delta, k)
            coh = self._first_harmonic_coherences(rho1)
            return reflection_from_coherences(coh, self.model.rates, amp_p, io_prefactor)

        k = cutoff
        while True:
            r_k = r_at(k)
            r_next = r_at(k + 2)
            if abs(abs(r_next) - abs(r_k)) < CONVERGENCE_TOL:
                return r_next, k + 2
            if not auto_escalate or k >= MAX_CUTOFF:
                raise HarmonicTruncationNotConverged(
                    f"|r| still moving by {abs(abs(r_next) - abs(r_k)):.2e} at cutoff {k + 2}"
                )
            k = min(2 * k, MAX_CUTOFF)


def linear_response_reflection(
    model: TransmonModel,
    pump: PumpConfig,
    omega_p: float,
    cross_mode: str = GEOMETRIC_MEAN,
    io_prefactor: float = 2.0,
) -> ReflectionPoint:
    atom = PumpedAtom(model, pump, cross_mode)
    return ReflectionPoint(omega_p, atom.linear_reflection(omega_p, io_prefactor), LINEAR_RESPONSE)


def harmonic_balance_reflection(
    model: TransmonModel,
    pump: PumpConfig,
    probe: ProbeConfig,
    cutoff: int = DEFAULT_CUTOFF,
    cross_mode: str = GEOMETRIC_MEAN,
    auto_escalate: bool = True,
    io_prefactor: float = 2.0,
) -> ReflectionPoint:
    atom = PumpedAtom(model, pump, cross_mode)
    r, _ = atom.harmonic_reflection(
        probe.omega_p, probe.amp_p, cutoff, auto_escalate, io_prefactor
    )
    return ReflectionPoint(probe.omega_p, r, HARMONIC_BALANCE)


def single_tone_reflection(
    model: TransmonModel,
    probe: ProbeConfig,
    cross_mode: str = GEOMETRIC_MEAN,
    io_prefactor: float = 2.0,
) -> ReflectionPoint:
    """Probe-only response: stationary state in the probe rotating frame."""
    if probe.amp_p <= 0.0:
        raise ValueError("probe amplitude must be positive")
    m = model.dim
    frame = PumpConfig(omega_pump=probe.omega_p, amp_pump=0.0)
    h = build_hamiltonian_static(model.levels, frame)
    h += build_hamiltonian_drive(probe.amp_p, m)  # same sqrt(n) ladder coupling
    liouv = build_liouvillian(h, build_dissipator(model.rates, cross_mode))
    rho = steady_state(liouv)
    coh = np.array(
        [np.trace(ladder_operator(m, n).conj().T @ rho.matrix) for n in range(1, m)]
    )
    r = reflection_from_coherences(coh, model.rates, probe.amp_p, io_prefactor)
    return ReflectionPoint(probe.omega_p, r, SINGLE_TONE)


@dataclass(frozen=True)
class PeakInfo:
    freq_hz: float
    height: float
    fwhm_hz: float


def analyze_peak(freq_hz, r_mag) -> PeakInfo:
    """Locate an amplification peak and its width above the |r| = 1 baseline.

    The half-height is 1 + (peak - 1)/2; crossings are found by linear
    interpolation on each flank.
    """
    f = np.asarray(freq_hz, dtype=float)
    y = np.asarray(r_mag, dtype=float)
    if len(f) < 5:
        raise ValueError("need at least five points across the peak")
    i = int(np.argmax(y))
    peak = y[i]
    if peak <= 1.0 + 1e-3:
        raise NoPeak("no amplification above the unit baseline")
    half = 1.0 + (peak - 1.0) / 2.0

    def cross(j, step):
        while 0 < j < len(y) - 1 and y[j + step] >= half:
            j += step
        k = j + step
        if k < 0 or k >= len(y):
            return f[j]
        y0, y1 = y[j], y[k]
        if y1 == y0:
            return f[j]
        return f[j] + (half - y0) * (f[k] - f[j]) / (y1 - y0)

    lo = cross(i, -1)
    hi = cross(i, +1)
    return PeakInfo(freq_hz=float(f[i]), height=float(peak), fwhm_hz=float(abs(hi - lo)))
