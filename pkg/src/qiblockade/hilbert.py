"""Truncated Hilbert space for a two-level emitter coupled to one cavity mode.

Basis ordering is emitter-major: composite index i = q*(n_max+1) + n with
q = 0 for the emitter ground state, q = 1 for the excited state, and n the
Fock occupation.  `tensor` fixes the factor order as (emitter, cavity); all
operators are dense complex matrices.  Operator data is frozen after
construction, so instances are safe to share between threads and processes.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ValidationError

TOL_HERM = 1e-10
TOL_TRACE = 1e-10
TOL_PSD = 1e-8

QD_DIM = 2
QD_GROUND = 0
QD_EXCITED = 1

_QD_LEVELS = {"g": QD_GROUND, "e": QD_EXCITED}


@dataclass(frozen=True)
class SpaceDims:
    """Size record of the truncated emitter (x) Fock space."""

    n_max: int

    def __post_init__(self):
        if not isinstance(self.n_max, int):
            raise ValidationError(f"n_max must be an integer, got {self.n_max!r}")
        if self.n_max < 2:
            raise ValidationError(
                f"n_max must be >= 2 so the two-photon sector exists, got {self.n_max}"
            )

    @property
    def fock_dim(self) -> int:
        return self.n_max + 1

    @property
    def total_dim(self) -> int:
        return QD_DIM * (self.n_max + 1)

    def index(self, qd_level: int, n_photons: int) -> int:
        """Composite basis index of |qd_level, n_photons>."""
        return qd_level * self.fock_dim + n_photons


def _frozen(data: np.ndarray) -> np.ndarray:
    arr = np.array(data, dtype=complex, order="C")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Operator:
    """Dense complex operator on the composite space."""

    dims: SpaceDims
    data: np.ndarray

    def __post_init__(self):
        d = self.dims.total_dim
        arr = _frozen(self.data)
        if arr.shape != (d, d):
            raise ValidationError(
                f"operator shape {arr.shape} does not match total_dim {d}"
            )
        object.__setattr__(self, "data", arr)

    def dag(self) -> "Operator":
        return Operator(self.dims, self.data.conj().T)


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """An Operator constrained to be a physical state (Hermitian, unit trace, PSD)."""

    op: Operator

    @property
    def data(self) -> np.ndarray:
        return self.op.data

    @property
    def dims(self) -> SpaceDims:
        return self.op.dims

    def validate(
        self,
        tol_herm: float = TOL_HERM,
        tol_trace: float = TOL_TRACE,
        tol_psd: float = TOL_PSD,
    ) -> None:
        rho = self.op.data
        herm_defect = np.max(np.abs(rho - rho.conj().T))
        if herm_defect > tol_herm:
            raise ValidationError(f"density matrix not Hermitian: defect {herm_defect:.3e}")
        tr = complex(np.trace(rho))
        if abs(tr - 1.0) > tol_trace:
            raise ValidationError(f"density matrix trace {tr} is not 1")
        evals = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))
        if evals.min() < -tol_psd:
            raise ValidationError(
                f"density matrix not positive semidefinite: min eigenvalue {evals.min():.3e}"
            )


def fock_annihilation(n_max: int) -> np.ndarray:
    """Annihilation operator on the (n_max+1)-dimensional Fock factor.

    Entry (n-1, n) = sqrt(n); the raising partner is the conjugate transpose.
    On the truncated space a^dag annihilates |n_max>.
    """
    if n_max < 2:
        raise ValidationError(f"n_max must be >= 2, got {n_max}")
    return np.diag(np.sqrt(np.arange(1, n_max + 1, dtype=float)), k=1).astype(complex)


def qubit_lowering() -> np.ndarray:
    """|g><e| in the (g, e) basis."""
    return np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)


def tensor(qd_factor: np.ndarray, cavity_factor: np.ndarray) -> Operator:
    """Kronecker product with fixed factor order: emitter first, cavity second."""
    qd = np.asarray(qd_factor, dtype=complex)
    cav = np.asarray(cavity_factor, dtype=complex)
    if qd.shape != (QD_DIM, QD_DIM):
        raise ValidationError(f"emitter factor must be 2x2, got shape {qd.shape}")
    if cav.ndim != 2 or cav.shape[0] != cav.shape[1]:
        raise ValidationError(f"cavity factor must be square, got shape {cav.shape}")
    dims = SpaceDims(cav.shape[0] - 1)
    return Operator(dims, np.kron(qd, cav))


def basis_state(qd_level: str, n_photons: int, n_max: int) -> DensityMatrix:
    """Pure-state projector |qd_level, n_photons><qd_level, n_photons|."""
    if qd_level not in _QD_LEVELS:
        raise ValidationError(f"qd_level must be 'g' or 'e', got {qd_level!r}")
    dims = SpaceDims(n_max)
    if not 0 <= n_photons <= n_max:
        raise ValidationError(
            f"n_photons must be in [0, {n_max}], got {n_photons}"
        )
    rho = np.zeros((dims.total_dim, dims.total_dim), dtype=complex)
    i = dims.index(_QD_LEVELS[qd_level], n_photons)
    rho[i, i] = 1.0
    return DensityMatrix(Operator(dims, rho))


@dataclass(frozen=True, eq=False)
class SpaceOps:
    """Composite-space embeddings of the elementary operators, built once per n_max."""

    dims: SpaceDims
    eye: np.ndarray
    a: np.ndarray
    ad: np.ndarray
    num: np.ndarray
    pair: np.ndarray  # a^dag a^dag a a
    sge: np.ndarray
    seg: np.ndarray
    see: np.ndarray


@lru_cache(maxsize=32)
def space_ops(n_max: int) -> SpaceOps:
    dims = SpaceDims(n_max)
    a_f = fock_annihilation(n_max)
    eye_f = np.eye(dims.fock_dim, dtype=complex)
    eye_q = np.eye(QD_DIM, dtype=complex)
    sge_f = qubit_lowering()

    a = tensor(eye_q, a_f).data
    ad = a.conj().T
    sge = tensor(sge_f, eye_f).data
    seg = sge.conj().T
    return SpaceOps(
        dims=dims,
        eye=_frozen(np.eye(dims.total_dim)),
        a=_frozen(a),
        ad=_frozen(ad),
        num=_frozen(ad @ a),
        pair=_frozen(ad @ ad @ a @ a),
        sge=_frozen(sge),
        seg=_frozen(seg),
        see=_frozen(seg @ sge),
    )
