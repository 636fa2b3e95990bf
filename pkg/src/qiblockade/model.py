"""System parameters, the rotating-frame interaction Hamiltonian, dressed-state
energies, and the closed-form drive settings that cancel the two-photon amplitude.

All rates are stored as plain numbers in a common unit (by convention the cavity
decay rate, so kappa = 1); the physics depends only on ratios.  Absolute-unit
input is handled at the CLI boundary.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from enum import Enum

from .errors import ValidationError
from .hilbert import Operator, SpaceDims, space_ops


class RateConvention(Enum):
    """How the quoted rates (kappa, gamma, gamma_d) enter the dissipators.

    FULL doubles the quoted rates in the Lindblad terms, so field *amplitudes*
    decay at kappa per photon and gamma for the exciton, matching the decay
    pattern of the truncated amplitude equations.  HALF uses the quoted rates
    directly (amplitude decay kappa/2, gamma/2).  HALF is the default: it is
    the convention that reproduces the reference blockade numbers (minimum
    pair correlation near 0.004 with intracavity photon number near 0.06 at
    g = 2 kappa, and the super-Poissonian dip at delta_c = 0.16 g with
    n_c = 1.6e-5); see README for the measured comparison of the two.
    """

    HALF = "half"
    FULL = "full"

    @property
    def lindblad_factor(self) -> float:
        return 2.0 if self is RateConvention.FULL else 1.0


def _normalize_angle(theta: float) -> float:
    """Map an angle into (-pi, pi]."""
    r = theta % (2.0 * math.pi)
    if r > math.pi:
        r -= 2.0 * math.pi
    return r


@dataclass(frozen=True)
class SystemParams:
    """Validated physical rates and drive settings.

    g           emitter-cavity coupling
    kappa       cavity decay rate (> 0; the unit of every other rate)
    gamma       emitter spontaneous emission rate
    gamma_d     pure dephasing rate
    eta         cavity drive strength
    omega_rabi  direct emitter pump strength
    theta       relative phase between pump and drive, normalized to (-pi, pi]
    delta_c     cavity-light detuning (drive and pump share one frequency, and
                the cavity and emitter are mutually resonant; configurations
                with unequal frequencies are rejected at the input boundary)
    n_max       Fock-space truncation
    convention  rate convention for the dissipators
    """

    g: float = 2.0
    kappa: float = 1.0
    gamma: float = 0.05
    gamma_d: float = 0.0
    eta: float = 0.1
    omega_rabi: float = 0.0
    theta: float = 0.0
    delta_c: float = 0.0
    n_max: int = 10
    convention: RateConvention = RateConvention.HALF

    def __post_init__(self):
        if self.kappa <= 0:
            raise ValidationError(f"kappa must be > 0, got {self.kappa}")
        for name in ("g", "gamma", "gamma_d", "eta", "omega_rabi"):
            value = getattr(self, name)
            if value < 0:
                raise ValidationError(f"{name} must be >= 0, got {value}")
        for name in ("g", "kappa", "gamma", "gamma_d", "eta", "omega_rabi", "theta", "delta_c"):
            if not math.isfinite(getattr(self, name)):
                raise ValidationError(f"{name} must be finite")
        SpaceDims(self.n_max)  # validates the truncation
        object.__setattr__(self, "theta", _normalize_angle(self.theta))
        if not isinstance(self.convention, RateConvention):
            raise ValidationError(f"convention must be a RateConvention, got {self.convention!r}")

    @property
    def dims(self) -> SpaceDims:
        return SpaceDims(self.n_max)


def amplitude_decays(p: SystemParams) -> tuple[float, float]:
    """Amplitude decay rates (photon, exciton) implied by the active convention."""
    half = 0.5 * p.convention.lindblad_factor
    return half * p.kappa, half * p.gamma


def build_hamiltonian(p: SystemParams) -> Operator:
    """Rotating-frame interaction Hamiltonian on the composite space.

    H = delta_c (a^dag a + see) + g (a^dag sge + a seg)
        + eta (a + a^dag) + omega_rabi (e^{i theta} sge + e^{-i theta} seg)
    """
    ops = space_ops(p.n_max)
    pump = p.omega_rabi * cmath.exp(1j * p.theta)
    h = (
        p.delta_c * (ops.num + ops.see)
        + p.g * (ops.ad @ ops.sge + ops.a @ ops.seg)
        + p.eta * (ops.a + ops.ad)
        + pump * ops.sge
        + pump.conjugate() * ops.seg
    )
    return Operator(ops.dims, h)


def jc_eigenvalues(n: int, p: SystemParams) -> tuple[float, float]:
    """Dressed-state energies (E_minus, E_plus) = n*delta_c -/+ g*sqrt(n).

    Valid for the undriven ladder (eta = omega_rabi = 0), where the n-excitation
    block spanned by |n, g> and |n-1, e> closes.
    """
    if n < 1:
        raise ValidationError(f"excitation number must be >= 1, got {n}")
    split = p.g * math.sqrt(n)
    base = n * p.delta_c
    return base - split, base + split


@dataclass(frozen=True)
class OptimalConditions:
    """Drive settings at which the two-photon amplitude cancels.

    theta_opt_red  phase for detuning delta_c = +g, in [0, pi/2]
    theta_opt_blue phase for detuning delta_c = -g, in [pi/2, pi]
    omega_opt      pump strength (scales linearly with eta)
    r_value        the intermediate ratio sqrt(4 + ((kappa+gamma)/g)^2)
    """

    theta_opt_red: float
    theta_opt_blue: float
    omega_opt: float
    r_value: float


def optimal_conditions(p: SystemParams) -> OptimalConditions:
    """Closed-form phase and pump strength cancelling the two-photon amplitude.

    theta_opt = arctan((kappa+gamma)/(2g)) on the red branch (delta_c = +g),
    and pi minus that on the blue branch; omega_opt = eta (R + sqrt(R^2+4))/2
    with R = sqrt(4 + ((kappa+gamma)/g)^2).
    """
    if p.g <= 0:
        raise ValidationError("optimal conditions require g > 0")
    ratio = (p.kappa + p.gamma) / p.g
    theta_red = math.atan(ratio / 2.0)
    r_value = math.sqrt(4.0 + ratio * ratio)
    omega_opt = p.eta * (r_value + math.sqrt(r_value * r_value + 4.0)) / 2.0
    if p.eta > 0 and not omega_opt > 2.0 * p.eta:
        raise ValidationError("omega_opt <= 2 eta; optimal-condition algebra violated")
    return OptimalConditions(
        theta_opt_red=theta_red,
        theta_opt_blue=math.pi - theta_red,
        omega_opt=omega_opt,
        r_value=r_value,
    )
