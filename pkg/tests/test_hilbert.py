import numpy as np
import pytest

from qiblockade import (
    DensityMatrix,
    Operator,
    SpaceDims,
    ValidationError,
    basis_state,
    fock_annihilation,
    qubit_lowering,
    space_ops,
    tensor,
)


def test_space_dims_validation():
    dims = SpaceDims(10)
    assert dims.total_dim == 22
    assert dims.fock_dim == 11
    with pytest.raises(ValidationError):
        SpaceDims(1)
    with pytest.raises(ValidationError):
        SpaceDims(-3)


def test_annihilation_matrix_elements():
    a = fock_annihilation(2)
    expected = np.zeros((3, 3), dtype=complex)
    expected[0, 1] = 1.0
    expected[1, 2] = np.sqrt(2.0)
    assert np.array_equal(a, expected)
    with pytest.raises(ValidationError):
        fock_annihilation(1)


def test_vacuum_annihilated():
    a = fock_annihilation(5)
    vac = np.zeros(6)
    vac[0] = 1.0
    assert np.array_equal(a @ vac, np.zeros(6))


@pytest.mark.parametrize("n_max", [2, 5, 10])
def test_number_operator_spectrum(n_max):
    a = fock_annihilation(n_max)
    num = a.conj().T @ a
    np.testing.assert_allclose(np.diag(num).real, np.arange(n_max + 1), rtol=1e-15)
    assert np.max(np.abs(num - np.diag(np.diag(num)))) == 0.0


@pytest.mark.parametrize("n_max", [2, 4, 10])
def test_commutator_boundary_defect(n_max):
    """[a, a^dag] = I except for the corner entry, which is -n_max exactly in pattern."""
    a = fock_annihilation(n_max)
    comm = a @ a.conj().T - a.conj().T @ a
    off_diag = comm - np.diag(np.diag(comm))
    assert np.max(np.abs(off_diag)) == 0.0
    np.testing.assert_allclose(np.diag(comm)[:-1].real, 1.0, rtol=4e-15)
    np.testing.assert_allclose(np.diag(comm)[-1].real, -n_max, rtol=4e-15)


def test_qubit_algebra_exact():
    sge = qubit_lowering()
    seg = sge.conj().T
    eye = np.eye(2)
    assert np.array_equal(sge @ seg + seg @ sge, eye)
    assert np.array_equal(sge @ sge, np.zeros((2, 2)))
    assert np.array_equal(sge @ seg, np.diag([1.0, 0.0]))  # |g><g|
    assert np.array_equal(seg @ sge, np.diag([0.0, 1.0]))  # |e><e|


def test_tensor_shape_and_order():
    n_max = 4
    a = fock_annihilation(n_max)
    eye2 = np.eye(2)
    op = tensor(eye2, a)
    assert op.data.shape == (2 * (n_max + 1), 2 * (n_max + 1))
    # emitter-major ordering: the (e,n)<-(e,n+1) element sits in the second block
    dims = op.dims
    assert op.data[dims.index(1, 0), dims.index(1, 1)] == 1.0

    see = qubit_lowering().conj().T @ qubit_lowering()
    proj = tensor(see, np.eye(n_max + 1)).data
    assert np.array_equal(proj, np.diag(np.diag(proj)))
    assert set(np.diag(proj).real) == {0.0, 1.0}


def test_tensor_factor_operators_commute():
    n_max = 3
    a_full = tensor(np.eye(2), fock_annihilation(n_max)).data
    sge_full = tensor(qubit_lowering(), np.eye(n_max + 1)).data
    comm = a_full @ sge_full - sge_full @ a_full
    assert np.max(np.abs(comm)) == 0.0


def test_tensor_mixed_product_and_associativity():
    rng = np.random.default_rng(7)
    n_max = 2
    qd = [rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2)) for _ in range(2)]
    cav = [
        rng.standard_normal((n_max + 1, n_max + 1))
        + 1j * rng.standard_normal((n_max + 1, n_max + 1))
        for _ in range(2)
    ]
    left = tensor(qd[0], cav[0]).data @ tensor(qd[1], cav[1]).data
    right = tensor(qd[0] @ qd[1], cav[0] @ cav[1]).data
    np.testing.assert_allclose(left, right, atol=1e-14)

    # three-factor associativity via raw kron against the nested composite
    m = rng.standard_normal((2, 2))
    nested1 = np.kron(np.kron(qd[0], m), cav[0])
    nested2 = np.kron(qd[0], np.kron(m, cav[0]))
    np.testing.assert_allclose(nested1, nested2, atol=1e-14)


def test_tensor_dimension_mismatch():
    with pytest.raises(ValidationError):
        tensor(np.eye(3), fock_annihilation(3))
    with pytest.raises(ValidationError):
        tensor(np.eye(2), np.ones((3, 4)))


def test_basis_state_invariants():
    rho = basis_state("g", 0, 6)
    rho.validate()
    assert np.trace(rho.data).real == 1.0

    ops = space_ops(6)
    rho2 = basis_state("g", 2, 6)
    rho2.validate()
    assert abs(np.trace(ops.num @ rho2.data) - 2.0) < 1e-15

    rho_e = basis_state("e", 0, 6)
    rho_e.validate()
    assert abs(np.trace(ops.see @ rho_e.data) - 1.0) < 1e-15


def test_basis_state_errors():
    with pytest.raises(ValidationError):
        basis_state("x", 0, 4)
    with pytest.raises(ValidationError):
        basis_state("g", 5, 4)
    with pytest.raises(ValidationError):
        basis_state("g", -1, 4)


def test_operator_immutable_and_shape_checked():
    dims = SpaceDims(2)
    op = Operator(dims, np.eye(dims.total_dim))
    with pytest.raises(ValueError):
        op.data[0, 0] = 5.0
    with pytest.raises(ValidationError):
        Operator(dims, np.eye(3))


def test_density_matrix_validation_catches_violations():
    dims = SpaceDims(2)
    good = np.zeros((dims.total_dim, dims.total_dim), dtype=complex)
    good[0, 0] = 1.0
    DensityMatrix(Operator(dims, good)).validate()

    bad_trace = good * 0.5
    with pytest.raises(ValidationError):
        DensityMatrix(Operator(dims, bad_trace)).validate()

    bad_herm = good.copy()
    bad_herm[0, 1] = 1e-3
    with pytest.raises(ValidationError):
        DensityMatrix(Operator(dims, bad_herm)).validate()

    bad_psd = good.copy()
    bad_psd[0, 0] = 1.5
    bad_psd[1, 1] = -0.5
    with pytest.raises(ValidationError):
        DensityMatrix(Operator(dims, bad_psd)).validate()
