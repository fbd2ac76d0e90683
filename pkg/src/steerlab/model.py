"""Two-qubit XY model: Hamiltonian, eigensystem, phases, basis changes.

Conventions used throughout the package:

* local product basis ordered (|00>, |01>, |10>, |11>), first slot qubit A,
  |0> the lower level of each qubit (hbar = 1);
* energy basis ordered (g, e1, e2, e3) ascending in energy;
* eigenvector global phases fixed so the |01> amplitude is real nonnegative.
"""
from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import PhaseBoundaryError

# tolerance for Hermiticity / unit trace of density matrices
HERM_TOL = 1e-12
# eigenvalues above -POSITIVITY_TOL count as positive semidefinite
POSITIVITY_TOL = 1e-9
# relative exclusion window around the level crossing kappa = 2 sqrt(eps_a eps_b)
BOUNDARY_REL_TOL = 1e-6


class Phase(enum.Enum):
    WEAK = "weak"
    STRONG = "strong"


class Basis(enum.Enum):
    LOCAL = "local"
    ENERGY = "energy"


@dataclass(frozen=True)
class SystemParams:
    """Bare model parameters, all in the same energy units.

    eps_a, eps_b : level splittings of qubits A and B (eps_a >= eps_b > 0)
    kappa        : XY exchange coupling between the qubits (> 0)
    gamma        : constant spectral-function value shared by both reservoirs;
                   gamma_a / gamma_b may override it per reservoir (they
                   default to gamma, the symmetric case used everywhere in
                   the shipped presets)
    """

    eps_a: float
    eps_b: float
    kappa: float
    gamma: float
    gamma_a: float | None = None
    gamma_b: float | None = None

    def __post_init__(self):
        if not (self.eps_a >= self.eps_b > 0):
            raise ValueError(
                f"require eps_a >= eps_b > 0, got eps_a={self.eps_a}, eps_b={self.eps_b}"
            )
        if self.kappa <= 0:
            raise ValueError(f"kappa must be > 0, got {self.kappa}")
        if self.gamma <= 0:
            raise ValueError(f"gamma must be > 0, got {self.gamma}")
        for name in ("gamma_a", "gamma_b"):
            g = getattr(self, name)
            if g is not None and g <= 0:
                raise ValueError(f"{name} must be > 0, got {g}")
        if max(self.res_gamma_a, self.res_gamma_b) > 0.1 * self.eps_b:
            warnings.warn(
                "gamma > 0.1*eps_b: weak system-reservoir coupling assumption "
                "is questionable",
                stacklevel=2,
            )

    @property
    def res_gamma_a(self) -> float:
        return self.gamma if self.gamma_a is None else self.gamma_a

    @property
    def res_gamma_b(self) -> float:
        return self.gamma if self.gamma_b is None else self.gamma_b


@dataclass(frozen=True)
class DerivedParams:
    """Quantities derived from SystemParams.

    bar_eps = (eps_a+eps_b)/2, delta_eps = eps_a-eps_b,
    omega = sqrt(delta_eps^2 + kappa^2)/2 (half the gap of the entangled pair),
    theta = arctan(kappa/delta_eps) in [0, pi/2], and the coupling phase.
    """

    bar_eps: float
    delta_eps: float
    omega: float
    theta: float
    phase: Phase


def derive_params(p: SystemParams) -> DerivedParams:
    """Compute derived parameters; reject couplings at the phase boundary.

    Strong phase iff kappa > 2*sqrt(eps_a*eps_b), equivalently omega > bar_eps.
    atan2 makes theta = pi/2 exact for degenerate qubits.
    """
    bar_eps = 0.5 * (p.eps_a + p.eps_b)
    delta_eps = p.eps_a - p.eps_b
    boundary = 2.0 * math.sqrt(p.eps_a * p.eps_b)
    if abs(p.kappa - boundary) <= BOUNDARY_REL_TOL * bar_eps:
        raise PhaseBoundaryError(
            f"kappa={p.kappa} within {BOUNDARY_REL_TOL * bar_eps:.3g} of the "
            f"level crossing at {boundary}; lower transition energy vanishes there"
        )
    omega = 0.5 * math.hypot(delta_eps, p.kappa)
    theta = math.pi / 2 if delta_eps == 0 else math.atan2(p.kappa, delta_eps)
    phase = Phase.STRONG if p.kappa > boundary else Phase.WEAK
    return DerivedParams(bar_eps, delta_eps, omega, theta, phase)


def hamiltonian_matrix(p: SystemParams) -> np.ndarray:
    """4x4 Hamiltonian in the local basis (|00>, |01>, |10>, |11>).

    Diagonal (-bar_eps, -delta_eps/2, +delta_eps/2, +bar_eps), with the
    exchange kappa/2 connecting |01> and |10>.
    """
    bar_eps = 0.5 * (p.eps_a + p.eps_b)
    delta_eps = p.eps_a - p.eps_b
    h = np.zeros((4, 4), dtype=complex)
    h[0, 0] = -bar_eps
    h[1, 1] = -0.5 * delta_eps
    h[2, 2] = +0.5 * delta_eps
    h[3, 3] = +bar_eps
    h[1, 2] = h[2, 1] = 0.5 * p.kappa
    return h


@dataclass(frozen=True)
class EigenSystem:
    """Eigen-decomposition of the two-qubit Hamiltonian.

    energies : ascending eigenvalues, labeled (g, e1, e2, e3)
    vectors  : matching orthonormal columns expressed in the local basis
    """

    energies: np.ndarray
    vectors: np.ndarray
    labels: tuple[str, str, str, str] = ("g", "e1", "e2", "e3")
    phase: Phase = Phase.WEAK

    def number_eigenvalues(self) -> np.ndarray:
        """Total-excitation eigenvalues in the (g, e1, e2, e3) order.

        The eigenvectors never mix excitation sectors, so the local
        diag(0, 1, 1, 2) operator stays diagonal in the energy basis.
        """
        n_local = np.array([0.0, 1.0, 1.0, 2.0])
        return np.einsum("ik,i,ik->k", self.vectors.conj(), n_local, self.vectors).real


def eigensystem(p: SystemParams) -> EigenSystem:
    """Analytic eigensystem with the fixed phase/ordering conventions.

    The entangled pair is
        psi_minus = cos(theta/2)|01> - sin(theta/2)|10>   (energy -omega)
        psi_plus  = sin(theta/2)|01> + cos(theta/2)|10>   (energy +omega)
    with |00> at -bar_eps and |11> at +bar_eps.  Weak-phase ordering is
    (|00>, psi-, psi+, |11>); strong-phase ordering (psi-, |00>, |11>, psi+).
    """
    d = derive_params(p)
    c, s = math.cos(d.theta / 2), math.sin(d.theta / 2)
    ket00 = np.array([1, 0, 0, 0], dtype=complex)
    ket11 = np.array([0, 0, 0, 1], dtype=complex)
    psi_minus = np.array([0, c, -s, 0], dtype=complex)
    psi_plus = np.array([0, s, c, 0], dtype=complex)
    if d.phase is Phase.WEAK:
        energies = np.array([-d.bar_eps, -d.omega, d.omega, d.bar_eps])
        columns = [ket00, psi_minus, psi_plus, ket11]
    else:
        energies = np.array([-d.omega, -d.bar_eps, d.bar_eps, d.omega])
        columns = [psi_minus, ket00, ket11, psi_plus]
    vectors = np.column_stack(columns)
    vectors.setflags(write=False)
    energies.setflags(write=False)
    return EigenSystem(energies=energies, vectors=vectors, phase=d.phase)


@dataclass(frozen=True)
class DensityMatrix4:
    """4x4 density matrix with an explicit basis tag.

    Hermiticity and unit trace are enforced at construction; positivity is
    queried separately because Bloch-Redfield states may (slightly) violate it
    and that must be reported, not rejected.
    """

    entries: np.ndarray
    basis: Basis

    def __post_init__(self):
        m = np.asarray(self.entries, dtype=complex)
        if m.shape != (4, 4):
            raise ValueError(f"density matrix must be 4x4, got {m.shape}")
        if np.max(np.abs(m - m.conj().T)) > HERM_TOL:
            raise ValueError("density matrix not Hermitian within 1e-12")
        if abs(m.trace().real - 1.0) > HERM_TOL or abs(m.trace().imag) > HERM_TOL:
            raise ValueError("density matrix trace must be 1 within 1e-12")
        m.setflags(write=False)
        object.__setattr__(self, "entries", m)

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.entries)[0])

    def is_positive(self, tol: float = POSITIVITY_TOL) -> bool:
        return self.min_eigenvalue() >= -tol


def basis_change(rho: DensityMatrix4, target: Basis, eig: EigenSystem) -> DensityMatrix4:
    """Unitary conjugation between the local and energy bases.

    With V the eigenvector columns, rho_local = V rho_energy V^dagger.
    """
    if rho.basis is target:
        return rho
    v = eig.vectors
    if target is Basis.LOCAL:
        m = v @ rho.entries @ v.conj().T
    else:
        m = v.conj().T @ rho.entries @ v
    m = 0.5 * (m + m.conj().T)
    return DensityMatrix4(entries=m, basis=target)
