import math
from dataclasses import replace

import numpy as np
import pytest

from qiblockade import (
    DensityMatrix,
    Operator,
    RateConvention,
    SolverError,
    SystemParams,
    ValidationError,
    basis_state,
    build_liouvillian,
    dissipator,
    optimal_conditions,
    photon_number,
    propagate,
    space_ops,
    steady_state,
    unvectorize,
    vectorize,
    zero_mode_count,
)

HALF = RateConvention.HALF
FULL = RateConvention.FULL

BASE = SystemParams(g=2.0, gamma=0.05, eta=0.1, delta_c=2.0, convention=HALF)
OPT = optimal_conditions(BASE)
P_QI = replace(BASE, theta=OPT.theta_opt_red, omega_rabi=OPT.omega_opt)

# Frozen steady-state fixtures (n_max = 10, HALF convention), pinned from the
# first verified run; regression guards, not oracles.
JC_POINT_N_C = 0.033021533083821955
JC_POINT_G2 = 0.4618034406538959


def _a_operator(n_max):
    ops = space_ops(n_max)
    return Operator(ops.dims, ops.a), ops


def test_dissipator_zero_rate_is_zero():
    a_op, _ = _a_operator(3)
    assert np.max(np.abs(dissipator(a_op, 0.0, HALF).data)) == 0.0


def test_dissipator_rejects_negative_rate():
    a_op, _ = _a_operator(3)
    with pytest.raises(ValidationError):
        dissipator(a_op, -0.1, HALF)


@pytest.mark.parametrize("convention,factor", [(HALF, 1.0), (FULL, 2.0)])
def test_number_decay_rate_per_convention(convention, factor):
    n_max = 4
    a_op, ops = _a_operator(n_max)
    rho = basis_state("g", 1, n_max).data
    rate = 0.7
    drho = unvectorize(dissipator(a_op, rate, convention).data @ vectorize(rho), ops.dims.total_dim)
    dn_dt = np.trace(ops.num @ drho).real
    assert dn_dt == pytest.approx(-factor * rate * 1.0, rel=1e-13)


def test_dissipator_preserves_trace_on_random_state():
    rng = np.random.default_rng(11)
    n_max = 3
    a_op, ops = _a_operator(n_max)
    d = ops.dims.total_dim
    m = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    rho = m @ m.conj().T
    rho /= np.trace(rho)
    drho = unvectorize(dissipator(a_op, 0.9, FULL).data @ vectorize(rho), d)
    assert abs(np.trace(drho)) < 1e-14


def test_liouvillian_left_null_vector_is_trace():
    liouv = build_liouvillian(P_QI)
    d = P_QI.dims.total_dim
    row = np.zeros(d * d, dtype=complex)
    row[np.arange(d) * d + np.arange(d)] = 1.0
    assert np.linalg.norm(row @ liouv.data) < 1e-10


def test_zero_rates_give_purely_imaginary_spectrum():
    p = SystemParams(
        g=1.3, kappa=1e-300, gamma=0.0, gamma_d=0.0, eta=0.2, omega_rabi=0.1,
        theta=0.4, delta_c=0.6, n_max=3, convention=HALF,
    )
    evals = np.linalg.eigvals(build_liouvillian(p).data)
    assert np.max(np.abs(evals.real)) < 1e-10


def test_spectrum_dissipative_with_single_zero_mode():
    p = replace(P_QI, n_max=4)
    liouv = build_liouvillian(p)
    evals = np.linalg.eigvals(liouv.data)
    assert evals.real.max() <= 1e-10
    assert zero_mode_count(liouv) == 1


@pytest.mark.parametrize("convention,factor", [(HALF, 1.0), (FULL, 2.0)])
def test_pure_dephasing_decays_coherence_without_populations(convention, factor):
    gamma_d = 0.2
    p = SystemParams(
        g=0.0, gamma=0.0, gamma_d=gamma_d, eta=0.0, omega_rabi=0.0,
        delta_c=0.0, n_max=2, convention=convention,
    )
    liouv = build_liouvillian(p)
    d = p.dims.total_dim
    rho0 = np.zeros((d, d), dtype=complex)
    ig, ie = p.dims.index(0, 0), p.dims.index(1, 0)
    rho0[ig, ig] = rho0[ie, ie] = 0.5
    rho0[ig, ie] = rho0[ie, ig] = 0.5
    t = 3.0
    out = propagate(liouv, Operator(p.dims, rho0), t).data
    # coherence decays at (lindblad rate)/2 = factor * gamma_d / 2; populations frozen
    expected = 0.5 * math.exp(-0.5 * factor * gamma_d * t)
    assert out[ig, ie].real == pytest.approx(expected, rel=1e-8)
    assert out[ig, ig].real == pytest.approx(0.5, abs=1e-10)
    assert out[ie, ie].real == pytest.approx(0.5, abs=1e-10)


@pytest.mark.parametrize(
    "convention,delta,omega,gamma,gamma_d",
    [
        (HALF, 0.0, 0.08, 0.1, 0.0),
        (FULL, 0.0, 0.08, 0.1, 0.0),
        (HALF, 0.3, 0.12, 0.2, 0.15),
        (FULL, -0.2, 0.05, 0.08, 0.3),
    ],
)
def test_driven_emitter_matches_bloch_steady_state(convention, delta, omega, gamma, gamma_d):
    """Two-level steady state against the textbook closed form.

    For standard-form rates G (emission) and G_d (dephasing), the excited
    population is w = 2 omega^2 g2c / (G (delta^2 + g2c^2) + 4 omega^2 g2c)
    with coherence width g2c = (G + G_d)/2; the active convention sets
    G = factor * gamma, G_d = factor * gamma_d.
    """
    p = SystemParams(
        g=0.0, gamma=gamma, gamma_d=gamma_d, eta=0.0, omega_rabi=omega,
        theta=0.7, delta_c=delta, n_max=2, convention=convention,
    )
    rho = steady_state(build_liouvillian(p)).rho
    ops = space_ops(p.n_max)
    w = np.trace(ops.see @ rho.data).real

    factor = convention.lindblad_factor
    big_g = factor * gamma
    g2c = 0.5 * (factor * gamma + factor * gamma_d)
    expected = 2 * omega**2 * g2c / (big_g * (delta**2 + g2c**2) + 4 * omega**2 * g2c)
    assert w == pytest.approx(expected, rel=1e-10)


def test_empty_cavity_steady_state_photon_number_both_conventions():
    for convention, expected in ((FULL, 0.01), (HALF, 0.04)):
        p = SystemParams(
            g=0.0, gamma=0.05, eta=0.1, delta_c=0.0, omega_rabi=0.0,
            n_max=10, convention=convention,
        )
        rho = steady_state(build_liouvillian(p)).rho
        assert photon_number(rho) == pytest.approx(expected, abs=1e-10)


def test_undriven_system_relaxes_to_ground_vacuum():
    p = replace(BASE, eta=0.0, omega_rabi=0.0, n_max=4)
    ss = steady_state(build_liouvillian(p))
    expected = basis_state("g", 0, 4).data
    np.testing.assert_allclose(ss.rho.data, expected, atol=1e-12)


def test_jc_point_regression_fixture():
    p = replace(BASE, omega_rabi=0.0, n_max=10)
    ss = steady_state(build_liouvillian(p))
    from qiblockade import g2_zero

    assert photon_number(ss.rho) == pytest.approx(JC_POINT_N_C, rel=1e-9)
    assert g2_zero(ss.rho) == pytest.approx(JC_POINT_G2, rel=1e-9)
    assert 0.1 < g2_zero(ss.rho) < 1.0  # sub-Poissonian dip on the lower branch


def test_steady_state_invariants_and_residual():
    ss = steady_state(build_liouvillian(P_QI), check_unique=False)
    ss.rho.validate()
    assert ss.residual < 1e-9
    assert ss.solver_info["dim"] == P_QI.dims.total_dim**2


def test_degenerate_null_space_is_reported():
    # no emitter decay and no drives: ground and excited emitter states are
    # both stationary, so the null space is two-dimensional
    p = SystemParams(
        g=0.0, gamma=0.0, gamma_d=0.0, eta=0.0, omega_rabi=0.0,
        delta_c=0.0, n_max=2, convention=HALF,
    )
    liouv = build_liouvillian(p)
    assert zero_mode_count(liouv) > 1
    with pytest.raises(SolverError):
        steady_state(liouv, check_unique=True)


def test_propagate_zero_time_is_identity():
    rho0 = basis_state("g", 1, 3).op
    liouv = build_liouvillian(replace(BASE, n_max=3))
    assert propagate(liouv, rho0, 0.0) is rho0


def test_propagate_steady_state_is_fixed_point():
    p = replace(P_QI, n_max=6)
    liouv = build_liouvillian(p)
    ss = steady_state(liouv)
    out = propagate(liouv, ss.rho.op, 7.0)
    assert np.max(np.abs(out.data - ss.rho.data)) < 1e-8


def test_vacuum_relaxes_to_steady_state():
    p = replace(P_QI, n_max=6)
    liouv = build_liouvillian(p)
    ss = steady_state(liouv)
    out = propagate(liouv, basis_state("g", 0, 6).op, 50.0)
    assert np.linalg.norm(out.data - ss.rho.data) < 1e-6


def test_propagate_preserves_hermiticity_and_trace():
    rng = np.random.default_rng(3)
    p = replace(P_QI, n_max=3)
    d = p.dims.total_dim
    m = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    rho0 = m @ m.conj().T
    rho0 /= np.trace(rho0)
    out = propagate(build_liouvillian(p), Operator(p.dims, rho0), 4.0).data
    assert np.max(np.abs(out - out.conj().T)) < 1e-9
    assert abs(np.trace(out) - 1.0) < 1e-8


def test_propagate_rejects_bad_arguments():
    liouv = build_liouvillian(replace(BASE, n_max=2))
    rho0 = basis_state("g", 0, 2).op
    with pytest.raises(ValidationError):
        propagate(liouv, rho0, -1.0)
    with pytest.raises(ValidationError):
        propagate(liouv, rho0, 1.0, dt=0.0)
