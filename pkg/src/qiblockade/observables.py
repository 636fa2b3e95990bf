"""Intracavity photon number, pair correlations, and the photon distribution."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import SolverError, ValidationError
from .hilbert import DensityMatrix, Operator, QD_DIM, space_ops
from .lindblad import Superoperator, propagate, step_propagator, vectorize
from .model import SystemParams

N_C_MIN = 1e-12  # below this mean photon number g2 is reported undefined

_IMAG_TOL = 1e-10


def _real_expectation(op: np.ndarray, rho: np.ndarray, what: str) -> float:
    value = complex(np.trace(op @ rho))
    if abs(value.imag) > _IMAG_TOL * max(1.0, abs(value.real)):
        raise SolverError(f"{what} has imaginary residual {value.imag:.3e}")
    return value.real


def photon_number(rho: DensityMatrix) -> float:
    """Mean intracavity photon number Tr(a^dag a rho)."""
    ops = space_ops(rho.dims.n_max)
    return _real_expectation(ops.num, rho.data, "photon number")


def g2_zero(rho: DensityMatrix) -> float:
    """Equal-time pair correlation Tr(a^dag a^dag a a rho) / n_c^2."""
    n_c = photon_number(rho)
    if n_c < N_C_MIN:
        raise ValidationError(
            f"g2(0) undefined: mean photon number {n_c:.3e} below {N_C_MIN:.0e}"
        )
    ops = space_ops(rho.dims.n_max)
    pair = _real_expectation(ops.pair, rho.data, "pair expectation")
    return pair / (n_c * n_c)


def photon_distribution(rho: DensityMatrix) -> np.ndarray:
    """Photon-number probabilities p_n, traced over the emitter."""
    d = rho.dims.fock_dim
    diag = np.real(np.diagonal(rho.data))
    return np.array([sum(diag[q * d + n] for q in range(QD_DIM)) for n in range(d)])


def g2_tau(
    liouv: Superoperator, rho_s: DensityMatrix, tau_grid: np.ndarray
) -> np.ndarray:
    """Delayed pair correlation g2(tau) on a nonnegative ascending grid.

    Uses two-time regression: the deformed operator a rho_s a^dag is propagated
    under the same generator and read out with a^dag a, normalized by n_c^2.
    Uniform grids use one fixed-step matrix exponential; non-uniform grids fall
    back to adaptive segment propagation.
    """
    taus = np.asarray(tau_grid, dtype=float)
    if taus.ndim != 1 or taus.size < 1:
        raise ValidationError("tau grid must be a non-empty 1-D array")
    if taus[0] < 0 or np.any(np.diff(taus) <= 0) and taus.size > 1:
        raise ValidationError("tau grid must be nonnegative and strictly ascending")

    n_c = photon_number(rho_s)
    if n_c < N_C_MIN:
        raise ValidationError("g2(tau) undefined: vanishing mean photon number")
    ops = space_ops(rho_s.dims.n_max)
    norm = n_c * n_c

    deformed = ops.a @ rho_s.data @ ops.ad
    values = np.empty(taus.size)

    def read_out(mat: np.ndarray, k: int) -> None:
        val = complex(np.trace(ops.num @ mat))
        if abs(val.imag) > _IMAG_TOL * max(1.0, abs(val.real)):
            raise SolverError(f"g2(tau) imaginary residual {val.imag:.3e}")
        real = val.real
        if real < -1e-12:
            raise SolverError(f"g2(tau) negative beyond roundoff: {real:.3e}")
        values[k] = max(real, 0.0) / norm

    steps = np.diff(taus)
    uniform = taus.size > 2 and np.allclose(steps, steps[0], rtol=1e-9, atol=0.0)
    current = deformed
    if taus[0] > 0:
        current = propagate(liouv, Operator(rho_s.dims, deformed), taus[0]).data
    read_out(current, 0)
    if taus.size == 1:
        return values

    if uniform:
        stepper = step_propagator(liouv, float(steps[0]))
        d = rho_s.dims.total_dim
        vec = vectorize(current)
        for k in range(1, taus.size):
            vec = stepper @ vec
            read_out(vec.reshape((d, d), order="F"), k)
    else:
        for k in range(1, taus.size):
            current = propagate(
                liouv, Operator(rho_s.dims, current), float(steps[k - 1])
            ).data
            read_out(current, k)
    return values


@dataclass(frozen=True)
class ObservableRecord:
    """One parameter point's observables: n_c, g2(0), and the photon distribution.

    g2_0 is NaN with g2_defined = False when the mean photon number is below
    the validity threshold.
    """

    n_c: float
    g2_0: float
    p_n: tuple
    params_echo: SystemParams
    g2_defined: bool = True


def record_from_state(rho: DensityMatrix, params: SystemParams) -> ObservableRecord:
    """Compute and cross-validate the observables of one steady state."""
    n_c = photon_number(rho)
    p_n = photon_distribution(rho)
    if p_n.min() < -1e-10:
        raise SolverError(f"photon distribution has entry {p_n.min():.3e} < -1e-10")
    total = float(p_n.sum())
    if abs(total - 1.0) > 1e-8:
        raise SolverError(f"photon distribution sums to {total}, not 1")
    moment = float(np.arange(p_n.size) @ p_n)
    if abs(moment - n_c) > 1e-8:
        raise SolverError(
            f"photon number {n_c} inconsistent with distribution moment {moment}"
        )
    if n_c < N_C_MIN:
        return ObservableRecord(
            n_c=n_c,
            g2_0=math.nan,
            p_n=tuple(p_n),
            params_echo=params,
            g2_defined=False,
        )
    value = g2_zero(rho)
    if value < 0:
        raise SolverError(f"g2(0) negative: {value}")
    return ObservableRecord(
        n_c=n_c, g2_0=value, p_n=tuple(p_n), params_echo=params, g2_defined=True
    )
