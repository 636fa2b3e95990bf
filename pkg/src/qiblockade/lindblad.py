"""Liouvillian assembly, trace-constrained steady-state solve, and propagation.

Vectorization is column-stacking: vec(A rho B) = (B^T kron A) vec(rho), so the
commutator part of the generator is -i (I kron H - H^T kron I) and a collapse
operator c with standard-form rate G contributes
G (conj(c) kron c - (I kron c^dag c + (c^dag c)^T kron I)/2).

The standard-form rate is convention.lindblad_factor times the quoted rate:
doubled for RateConvention.FULL (field amplitudes decay at kappa per photon,
gamma for the exciton), literal for HALF.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.integrate
import scipy.linalg

from .errors import SolverError, ValidationError
from .hilbert import DensityMatrix, Operator, SpaceDims, space_ops
from .model import RateConvention, SystemParams, build_hamiltonian

STEADY_RESIDUAL_TOL = 1e-9
ZERO_MODE_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class Superoperator:
    """Dense linear map on column-vectorized density matrices."""

    dims: SpaceDims
    data: np.ndarray

    def __post_init__(self):
        d2 = self.dims.total_dim**2
        arr = np.array(self.data, dtype=complex, order="C")
        if arr.shape != (d2, d2):
            raise ValidationError(
                f"superoperator shape {arr.shape} does not match total_dim^2 {d2}"
            )
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)


@dataclass(frozen=True, eq=False)
class SteadyState:
    rho: DensityMatrix
    residual: float
    solver_info: dict


def vectorize(rho: np.ndarray) -> np.ndarray:
    """Column-stack a matrix."""
    return np.asarray(rho).reshape(-1, order="F")


def unvectorize(vec: np.ndarray, dim: int) -> np.ndarray:
    return np.asarray(vec).reshape((dim, dim), order="F")


def _plain_dissipator(c: np.ndarray) -> np.ndarray:
    """Standard-form dissipator c . c^dag - {c^dag c, .}/2 at unit rate."""
    cdc = c.conj().T @ c
    eye = np.eye(c.shape[0], dtype=complex)
    return (
        np.kron(c.conj(), c)
        - 0.5 * np.kron(eye, cdc)
        - 0.5 * np.kron(cdc.T, eye)
    )


def dissipator(collapse_op: Operator, rate: float, convention: RateConvention) -> Superoperator:
    """Dissipative generator for one collapse operator at the quoted rate.

    The effective standard-form rate is rate * convention.lindblad_factor, so
    a number-state population decays at twice the quoted rate under FULL and
    at the quoted rate under HALF.
    """
    if rate < 0:
        raise ValidationError(f"dissipator rate must be >= 0, got {rate}")
    return Superoperator(
        collapse_op.dims,
        (convention.lindblad_factor * rate) * _plain_dissipator(collapse_op.data),
    )


@lru_cache(maxsize=64)
def _dissipative_part(
    n_max: int, kappa: float, gamma: float, gamma_d: float, factor: float
) -> np.ndarray:
    ops = space_ops(n_max)
    data = factor * (
        kappa * _plain_dissipator(ops.a)
        + gamma * _plain_dissipator(ops.sge)
        + gamma_d * _plain_dissipator(ops.see)
    )
    data.setflags(write=False)
    return data


def build_liouvillian(p: SystemParams) -> Superoperator:
    """Generator of the master equation: commutator part plus cavity decay,
    emitter emission, and pure dephasing (collapse operator |e><e|)."""
    ops = space_ops(p.n_max)
    h = build_hamiltonian(p).data
    eye = ops.eye
    data = -1j * (np.kron(eye, h) - np.kron(h.T, eye))
    data += _dissipative_part(
        p.n_max, p.kappa, p.gamma, p.gamma_d, p.convention.lindblad_factor
    )
    return Superoperator(ops.dims, data)


def trace_functional(dims: SpaceDims) -> np.ndarray:
    """Row vector t with t . vec(rho) = Tr(rho) under column stacking."""
    d = dims.total_dim
    row = np.zeros(d * d, dtype=complex)
    row[np.arange(d) * d + np.arange(d)] = 1.0
    return row


def zero_mode_count(liouv: Superoperator, tol: float = ZERO_MODE_TOL) -> int:
    """Number of eigenvalues of the generator with |lambda| below tol."""
    evals = np.linalg.eigvals(liouv.data)
    return int(np.count_nonzero(np.abs(evals) < tol))


def steady_state(liouv: Superoperator, check_unique: bool = False) -> SteadyState:
    """Unique trace-one null state of the generator.

    One row of the generator (the ground-population balance, which is linearly
    dependent on the others through trace preservation) is replaced by the
    vectorized trace constraint, and the resulting system is solved directly.
    `check_unique` additionally counts near-zero eigenvalues and rejects a
    degenerate null space instead of averaging over it.
    """
    d = liouv.dims.total_dim
    if check_unique:
        n_zero = zero_mode_count(liouv)
        if n_zero != 1:
            raise SolverError(
                f"generator null space is {n_zero}-dimensional; steady state not unique"
            )
    else:
        n_zero = None

    system = np.array(liouv.data)
    system[0, :] = trace_functional(liouv.dims)
    rhs = np.zeros(d * d, dtype=complex)
    rhs[0] = 1.0
    try:
        vec = scipy.linalg.solve(system, rhs)
    except (scipy.linalg.LinAlgError, ValueError) as exc:
        raise SolverError(f"steady-state solve failed: {exc}") from exc

    rho = unvectorize(vec, d)
    rho = 0.5 * (rho + rho.conj().T)  # discard solver-roundoff antisymmetry
    residual = float(np.linalg.norm(liouv.data @ vectorize(rho)))
    if residual > STEADY_RESIDUAL_TOL:
        raise SolverError(
            f"steady-state residual {residual:.3e} exceeds {STEADY_RESIDUAL_TOL:.1e}; "
            "the null space may be degenerate or the system ill-conditioned"
        )
    state = DensityMatrix(Operator(liouv.dims, rho))
    try:
        state.validate()
    except ValidationError as exc:
        raise SolverError(f"steady state unphysical: {exc}") from exc
    return SteadyState(
        rho=state,
        residual=residual,
        solver_info={
            "dim": d * d,
            "replaced_row": 0,
            "residual": residual,
            "null_space_dim": n_zero,
        },
    )


def propagate(liouv: Superoperator, rho0: Operator, t: float, dt: float | None = None) -> Operator:
    """Apply exp(L t) to an operator (not necessarily a physical state).

    Adaptive high-order integration of the vectorized linear ODE; `dt` caps the
    internal step when given.  Unnormalized inputs are allowed, as needed for
    two-time correlations.
    """
    if t < 0:
        raise ValidationError(f"propagation time must be >= 0, got {t}")
    if dt is not None and dt <= 0:
        raise ValidationError(f"step cap must be > 0, got {dt}")
    if t == 0:
        return rho0
    d = liouv.dims.total_dim
    mat = liouv.data

    result = scipy.integrate.solve_ivp(
        lambda _t, v: mat @ v,
        (0.0, t),
        vectorize(rho0.data).astype(complex),
        method="DOP853",
        rtol=1e-10,
        atol=1e-12,
        max_step=dt if dt is not None else np.inf,
    )
    if not result.success:
        raise SolverError(f"propagation failed: {result.message}")
    final = result.y[:, -1]
    if not np.all(np.isfinite(final)):
        raise SolverError("propagation produced non-finite values")
    return Operator(liouv.dims, unvectorize(final, d))


def step_propagator(liouv: Superoperator, dt: float) -> np.ndarray:
    """exp(L dt) as a dense matrix, for repeated fixed-step application."""
    if dt <= 0:
        raise ValidationError(f"step must be > 0, got {dt}")
    return scipy.linalg.expm(liouv.data * dt)
