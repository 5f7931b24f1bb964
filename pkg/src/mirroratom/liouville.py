"""Lindblad generator construction and steady-state / time-domain solvers.

Density matrices are column-stacked: vec(rho)[i + j*M] = rho[i, j], so
vec(A rho B) = (B^T kron A) vec(rho). Generators are kept sparse (CSR);
at the scales used here (M <= 8, Liouvillians up to 4096 x 4096) direct
sparse factorization is cheap and exact.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.integrate import solve_ivp

from .errors import DimensionMismatch, NonUniqueSteadyState, SolverFailure, StepUnderflow
from .model import RateTable, ladder_operator, projector

GEOMETRIC_MEAN = "geometric"
ARITHMETIC_MEAN = "arithmetic"

_TRACE_TOL = 1e-10
_HERM_TOL = 1e-10
_POSITIVITY_TOL = 1e-8


def vectorize(rho: np.ndarray) -> np.ndarray:
    """Column-stack a matrix."""
    return np.asarray(rho, dtype=complex).reshape(-1, order="F")


def unvectorize(v: np.ndarray, dim: int) -> np.ndarray:
    return np.asarray(v, dtype=complex).reshape((dim, dim), order="F")


def spre(a: np.ndarray) -> sp.csr_matrix:
    """Superoperator of rho -> A rho."""
    m = a.shape[0]
    return sp.kron(sp.identity(m), sp.csr_matrix(a), format="csr")


def spost(a: np.ndarray) -> sp.csr_matrix:
    """Superoperator of rho -> rho A."""
    m = a.shape[0]
    return sp.kron(sp.csr_matrix(a.T), sp.identity(m), format="csr")


def sandwich(a: np.ndarray, b: np.ndarray) -> sp.csr_matrix:
    """Superoperator of rho -> B rho A."""
    return sp.kron(sp.csr_matrix(a.T), sp.csr_matrix(b), format="csr")


@dataclass(frozen=True)
class DensityState:
    """Hermitian, unit-trace, (numerically) positive M x M state."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DimensionMismatch("density matrix must be square")
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def ground(cls, dim: int) -> "DensityState":
        m = np.zeros((dim, dim), dtype=complex)
        m[0, 0] = 1.0
        return cls(m)

    def validate(
        self,
        trace_tol: float = _TRACE_TOL,
        herm_tol: float = _HERM_TOL,
        positivity_tol: float = _POSITIVITY_TOL,
    ) -> "DensityState":
        m = self.matrix
        if abs(np.trace(m) - 1.0) > trace_tol:
            raise SolverFailure(f"trace deviates by {abs(np.trace(m) - 1.0):.2e}")
        if np.max(np.abs(m - m.conj().T)) > herm_tol:
            raise SolverFailure("state is not Hermitian within tolerance")
        w = np.linalg.eigvalsh(0.5 * (m + m.conj().T))
        if w.min() < -positivity_tol:
            raise SolverFailure(f"negative population {w.min():.2e}")
        return self


@dataclass(frozen=True)
class Superoperator:
    """Linear map on column-vectorized density matrices."""

    dim: int
    matrix: sp.csr_matrix

    def __post_init__(self):
        n = self.dim * self.dim
        if self.matrix.shape != (n, n):
            raise DimensionMismatch(
                f"superoperator matrix {self.matrix.shape} does not match dim {self.dim}"
            )

    def __add__(self, other: "Superoperator") -> "Superoperator":
        if self.dim != other.dim:
            raise DimensionMismatch("superoperator dims differ")
        return Superoperator(self.dim, (self.matrix + other.matrix).tocsr())

    def __call__(self, rho: np.ndarray) -> np.ndarray:
        rho = np.asarray(rho, dtype=complex)
        if rho.shape != (self.dim, self.dim):
            raise DimensionMismatch("state does not match superoperator dimension")
        return unvectorize(self.matrix @ vectorize(rho), self.dim)

    @property
    def nnz(self) -> int:
        return self.matrix.nnz

    def trace_defect(self) -> float:
        """Norm of the trace row t^dag L; zero for trace-preserving maps."""
        t = np.zeros(self.dim * self.dim, dtype=complex)
        t[np.arange(self.dim) * (self.dim + 1)] = 1.0
        return float(np.linalg.norm(self.matrix.conj().T @ t))


def zero_superoperator(dim: int) -> Superoperator:
    n = dim * dim
    return Superoperator(dim, sp.csr_matrix((n, n), dtype=complex))


def lindblad_cross_term(a: np.ndarray, b: np.ndarray) -> Superoperator:
    """Bilinear dissipation term D[A, B] rho = B rho A - (A B rho + rho A B)/2."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != b.shape or a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch("operators must be square and of equal dimension")
    ab = a @ b
    mat = sandwich(a, b) - 0.5 * spre(ab) - 0.5 * spost(ab)
    return Superoperator(a.shape[0], mat.tocsr())


def relaxation_coefficients(rates: RateTable, cross_mode: str) -> np.ndarray:
    """Cross-coupling matrix c_{nm} between decay channels n and m."""
    g = rates.relax
    if cross_mode == GEOMETRIC_MEAN:
        root = np.sqrt(g)
        return np.outer(root, root)
    if cross_mode == ARITHMETIC_MEAN:
        return 0.5 * (g[:, None] + g[None, :])
    raise ValueError(f"unknown cross mode {cross_mode!r}")


def build_dissipator(rates: RateTable, cross_mode: str = GEOMETRIC_MEAN) -> Superoperator:
    """Relaxation with cross-channel coupling, plus pure dephasing.

    Relaxation: sum_{n,m} c_{nm} D[sigma_{n,n-1}, sigma_{m-1,m}]. The
    geometric-mean coefficients sqrt(Gamma_n Gamma_m) form a rank-one
    positive matrix and equal a single collective jump operator
    c = sum_n sqrt(Gamma_n) sigma_{n-1,n}; the arithmetic-mean variant
    (Gamma_n + Gamma_m)/2 is kept for comparison but is not completely
    positive for unequal rates. Dephasing: sum_n 2 Gamma_n^phi
    D[sigma_{n,n}, sigma_{n,n}].
    """
    m = rates.dim
    c = relaxation_coefficients(rates, cross_mode)
    total = zero_superoperator(m)
    for n in range(1, m):
        raising = ladder_operator(m, n)
        for k in range(1, m):
            if c[n - 1, k - 1] == 0.0:
                continue
            lowering = ladder_operator(m, k).conj().T
            total = total + Superoperator(
                m, c[n - 1, k - 1] * lindblad_cross_term(raising, lowering).matrix
            )
    for n in range(1, m):
        if rates.dephase[n - 1] == 0.0:
            continue
        p = projector(m, n)
        total = total + Superoperator(
            m, 2.0 * rates.dephase[n - 1] * lindblad_cross_term(p, p).matrix
        )
    return total


def build_liouvillian(h: np.ndarray, dissipator: Superoperator) -> Superoperator:
    """L(rho) = -i [H, rho] + dissipator(rho)."""
    h = np.asarray(h, dtype=complex)
    if h.shape != (dissipator.dim, dissipator.dim):
        raise DimensionMismatch("Hamiltonian does not match dissipator dimension")
    mat = -1j * (spre(h) - spost(h)) + dissipator.matrix
    return Superoperator(dissipator.dim, mat.tocsr())


def _trace_row(dim: int) -> tuple[np.ndarray, np.ndarray]:
    idx = np.arange(dim) * (dim + 1)
    vals = np.ones(dim, dtype=complex)
    return idx, vals


def steady_state(liouv: Superoperator, residual_tol: float = 1e-9) -> DensityState:
    """Stationary state of the generator.

    Solves L x = 0 with the trace row replacing one equation. The residual
    ||L x|| must stay below residual_tol * ||L||_F; on failure the nullspace
    dimension is estimated by SVD to distinguish a non-unique stationary
    state from numerical breakdown.
    """
    dim = liouv.dim
    n = dim * dim
    a = liouv.matrix.tolil(copy=True)
    idx, vals = _trace_row(dim)
    a.rows[0] = list(idx)
    a.data[0] = list(vals)
    b = np.zeros(n, dtype=complex)
    b[0] = 1.0
    norm_l = spla.norm(liouv.matrix)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", spla.MatrixRankWarning)
            x = spla.spsolve(a.tocsc(), b)
    except Exception:
        x = np.full(n, np.nan)
    ok = np.all(np.isfinite(x))
    if ok:
        residual = np.linalg.norm(liouv.matrix @ x)
        ok = residual <= residual_tol * max(norm_l, 1.0)
    if not ok:
        s = np.linalg.svd(liouv.matrix.toarray(), compute_uv=False)
        null_dim = int(np.sum(s <= max(norm_l, 1.0) * 1e-12))
        if null_dim > 1:
            raise NonUniqueSteadyState(
                f"generator nullspace dimension {null_dim}; stationary state is not unique"
            )
        raise SolverFailure("steady-state solve failed the residual check")
    rho = unvectorize(x, dim)
    rho = 0.5 * (rho + rho.conj().T)
    rho /= np.trace(rho).real
    return DensityState(rho)


def evolve(
    liouv: Superoperator,
    rho0: DensityState,
    t_final: float,
    dt_hint: float | None = None,
    rtol: float = 1e-9,
    atol: float = 1e-12,
) -> DensityState:
    """Propagate rho0 for t_final seconds under d rho / dt = L rho.

    Adaptive high-order integration; the trace may drift by at most 1e-8
    before renormalization, else the run is rejected.
    """
    if t_final < 0.0:
        raise ValueError("t_final must be nonnegative")
    if rho0.dim != liouv.dim:
        raise DimensionMismatch("state does not match generator dimension")
    if t_final == 0.0:
        return rho0
    mat = liouv.matrix

    def rhs(_t, y):
        return mat @ y

    kwargs = {}
    if dt_hint is not None:
        kwargs["first_step"] = dt_hint
    sol = solve_ivp(
        rhs,
        (0.0, t_final),
        vectorize(rho0.matrix),
        method="DOP853",
        rtol=rtol,
        atol=atol,
        dense_output=False,
        **kwargs,
    )
    if not sol.success:
        raise StepUnderflow(f"integrator stopped: {sol.message}")
    rho = unvectorize(sol.y[:, -1], liouv.dim)
    drift = abs(np.trace(rho) - 1.0)
    if drift > 1e-8:
        raise StepUnderflow(f"trace drifted by {drift:.2e} during integration")
    rho = 0.5 * (rho + rho.conj().T)
    rho /= np.trace(rho).real
    return DensityState(rho)


def expectation(rho: DensityState | np.ndarray, op: np.ndarray) -> complex:
    """Tr(rho A)."""
    m = rho.matrix if isinstance(rho, DensityState) else np.asarray(rho, dtype=complex)
    op = np.asarray(op, dtype=complex)
    if m.shape != op.shape:
        raise DimensionMismatch("state and operator dimensions differ")
    return complex(np.trace(m @ op))
