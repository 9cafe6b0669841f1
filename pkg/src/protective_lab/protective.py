"""Protective measurement dynamics: exact evolution, first-order expansion, metrics.

The system is coupled to the pointer for a time ``T`` with constant strength
``g = 1/T``::

    H = H_S (x) 1 + 1 (x) H_A + (1/T) O (x) P

Ordering is system (x) apparatus throughout; the customary ``P (x) O``
notation describes the same operator with the factors swapped. The joint
state is stored as a flat vector of length ``d_S * d_A`` whose apparatus
factor is in the pointer momentum basis.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field, replace

import numpy as np

from . import qcore
from .apparatus import (ApparatusSpec, PointerBasis, boundary_mass, build_pointer,
                        check_wraparound, gaussian_pointer)
from .qcore import DensityMatrix, EigenSystem, HermitianOperator, Ket

DEFAULT_GAP_MIN = 1e-6
DEFAULT_DIM_CAP = 8192
# Adiabatic-validity indicator below which perturbative comparisons are trusted.
VALIDITY_GATE = 0.1


class DegenerateStateError(ValueError):
    """The protected level is (numerically) degenerate."""


class ResourceCapError(MemoryError):
    """The joint space exceeds the configured dense-matrix cap."""


class ResolutionError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class SystemSpec:
    """System Hamiltonian, measured observable and protected level.

    ``n_index`` counts eigenvalues of ``H_S`` in ascending order.
    """

    H_S: HermitianOperator
    O: HermitianOperator
    n_index: int = 0
    gap_min: float = DEFAULT_GAP_MIN

    def __post_init__(self):
        for name in ("H_S", "O"):
            val = getattr(self, name)
            if not isinstance(val, HermitianOperator):
                object.__setattr__(self, name, HermitianOperator(val))
        if self.H_S.dim != self.O.dim:
            raise ValueError(f"H_S is {self.H_S.dim}-dimensional but O is {self.O.dim}-dimensional")
        if not 0 <= self.n_index < self.H_S.dim:
            raise ValueError(f"n_index {self.n_index} out of range for d_S={self.H_S.dim}")
        if self.dim > 1 and self.level_gap < self.gap_min:
            raise DegenerateStateError(
                f"level {self.n_index} of H_S is degenerate: gap {self.level_gap:.3e} "
                f"< gap_min {self.gap_min:g}")

    @property
    def dim(self) -> int:
        return self.H_S.dim

    @functools.cached_property
    def eigensystem(self) -> EigenSystem:
        return qcore.eigh(self.H_S)

    @property
    def level_gap(self) -> float:
        lam = self.eigensystem.eigenvalues
        others = np.delete(lam, self.n_index)
        return float(np.min(np.abs(others - lam[self.n_index]))) if others.size else np.inf

    @property
    def initial_ket(self) -> Ket:
        return self.eigensystem.vector(self.n_index)


@dataclass(frozen=True, eq=False)
class ProtectiveSetup:
    system: SystemSpec
    apparatus: ApparatusSpec = field(default_factory=ApparatusSpec)
    T: float = 100.0
    coupling: float = 1.0  # multiplies g = 1/T; 0 switches the interaction off
    second_order_phase: bool = False
    strict_boundary: bool = False
    dim_cap: int = DEFAULT_DIM_CAP

    def __post_init__(self):
        if not (np.isfinite(self.T) and self.T > 0):
            raise ValueError(f"T must be a positive finite time, got {self.T}")
        self.apparatus.validate()
        if self.strict_boundary and not self.resolution_ok:
            raise ResolutionError(
                f"pointer spacing dx={self.apparatus.dx:.4g} does not resolve the spectral "
                f"range of O ({self.observable_range:.4g}); need dx <= range/8")

    @property
    def g(self) -> float:
        return self.coupling / self.T

    @property
    def dims(self) -> tuple[int, int]:
        return self.system.dim, self.apparatus.d_A

    @property
    def observable_range(self) -> float:
        lam = np.linalg.eigvalsh(self.system.O.matrix)
        return float(lam[-1] - lam[0])

    @property
    def resolution_ok(self) -> bool:
        rng = self.observable_range
        return rng == 0 or self.apparatus.dx <= rng / 8

    @property
    def pointer(self) -> PointerBasis:
        return _pointer(self.apparatus)

    def with_T(self, T: float) -> "ProtectiveSetup":
        return replace(self, T=T)


@functools.lru_cache(maxsize=32)
def _pointer(spec: ApparatusSpec) -> PointerBasis:
    return build_pointer(spec)


@dataclass(frozen=True, eq=False)
class JointState:
    """Unit-norm state on system (x) pointer, pointer in the momentum basis."""

    ket: Ket
    dims: tuple[int, int]

    def __post_init__(self):
        if not isinstance(self.ket, Ket):
            object.__setattr__(self, "ket", Ket(self.ket))
        if self.dims[0] * self.dims[1] != self.ket.dim:
            raise ValueError(f"dims {self.dims} do not match state length {self.ket.dim}")

    @property
    def amplitudes(self) -> np.ndarray:
        return self.ket.amplitudes

    def block(self) -> np.ndarray:
        """Amplitudes reshaped to ``(d_S, d_A)``."""
        return self.ket.amplitudes.reshape(self.dims)

    def reduced_system(self) -> DensityMatrix:
        return qcore.reduced_from_ket(self.ket, self.dims, keep="S")


@dataclass(frozen=True, eq=False)
class PerturbativeState:
    state: JointState
    norm_deficit: float  # ||psi|| - 1 before renormalisation
    branch_populations: np.ndarray  # first-order weight on each eigenstate of H_S
    validity_indicator: float


@dataclass(frozen=True, eq=False)
class EvolutionReport:
    T: float
    psi_exact: JointState
    psi_pert: JointState
    pointer_shift: float
    expectation_target: float
    disturbance_prob: float
    entropy_bits: float
    pert_error: float
    validity_indicator: float
    norm_deficit: float
    boundary_mass: float
    resolution_ok: bool
    rho_S: DensityMatrix

    def summary(self) -> dict:
        return {
            "T": self.T,
            "pointer_shift": self.pointer_shift,
            "expectation_target": self.expectation_target,
            "disturbance_prob": self.disturbance_prob,
            "entropy_bits": self.entropy_bits,
            "pert_error": self.pert_error,
            "validity_indicator": self.validity_indicator,
            "norm_deficit": self.norm_deficit,
            "boundary_mass": self.boundary_mass,
            "resolution_ok": self.resolution_ok,
        }


def assemble_hamiltonian(setup: ProtectiveSetup) -> HermitianOperator:
    d_S, d_A = setup.dims
    ptr = setup.pointer
    H = (qcore.tensor(setup.system.H_S.matrix, np.eye(d_A))
         + qcore.tensor(np.eye(d_S), ptr.H_A.matrix)
         + setup.g * qcore.tensor(setup.system.O.matrix, ptr.P.matrix))
    return HermitianOperator(H)


def conditioned_eigensystem(setup: ProtectiveSetup, a_i: float) -> EigenSystem:
    """Eigensystem of ``H_S + (a_i / T) O``, the system block at pointer momentum ``a_i``."""
    return qcore.eigh(setup.system.H_S + setup.g * a_i * setup.system.O)


def validity_indicator(setup: ProtectiveSetup) -> float:
    """``p_max * ||O|| / (T * gap)``: size of the first-order mixing coefficient."""
    return (setup.apparatus.p_max * abs(setup.coupling) * setup.system.O.spectral_norm()
            / (setup.T * setup.system.level_gap))


def initial_state(setup: ProtectiveSetup) -> JointState:
    phi = gaussian_pointer(setup.pointer)
    return JointState(Ket(qcore.tensor(setup.system.initial_ket, phi)), setup.dims)


def evolve_exact(setup: ProtectiveSetup) -> JointState:
    """``exp(-i H T) |n>|phi(x0)>`` by full diagonalization of the joint Hamiltonian."""
    dim = setup.dims[0] * setup.dims[1]
    if dim > setup.dim_cap:
        raise ResourceCapError(f"joint dimension {dim} exceeds the cap {setup.dim_cap}")
    eig = qcore.eigh(assemble_hamiltonian(setup))
    psi = qcore.apply_propagator(eig, setup.T, initial_state(setup).amplitudes)
    return JointState(Ket.normalized(psi), setup.dims)


def _second_order_shifts(energies: np.ndarray, O_eig: np.ndarray, gap_min: float) -> np.ndarray:
    """``c_k = sum_{m != k} |O_mk|^2 / (E_k - E_m)`` skipping near-degenerate pairs."""
    diff = energies[:, None] - energies[None, :]
    mask = np.abs(diff) >= gap_min
    w = np.abs(O_eig) ** 2
    return np.sum(np.where(mask, w / np.where(mask, diff, 1.0), 0.0), axis=1)


def perturbative_expansion(setup: ProtectiveSetup) -> PerturbativeState:
    """First-order-in-1/T joint state with distorted pointer branches.

    Branch ``m != n`` carries ``(1/T) <m|O|n> / (E_n - E_m)`` times the
    difference of the distorted packet shifted by ``<O>_n`` (phase ``E_n T``)
    and by ``<O>_m`` (phase ``E_m T``). With ``second_order_phase`` every
    branch additionally picks up the second-order energy phase
    ``(a/T)^2 c_k T``.
    """
    sysm = setup.system
    eig = sysm.eigensystem
    E, V = eig.eigenvalues, eig.eigenvectors
    n = sysm.n_index
    O_eig = V.conj().T @ sysm.O.matrix @ V
    O_diag = np.real(np.diag(O_eig))
    ptr = setup.pointer
    a = ptr.momentum_values
    lam, T = setup.coupling, setup.T
    phi = gaussian_pointer(ptr).amplitudes
    free = np.exp(-1j * ptr.spec.mass_inv * a**2 * T)

    phases = E[:, None] * T + lam * a[None, :] * O_diag[:, None]
    if setup.second_order_phase:
        c = _second_order_shifts(E, O_eig, sysm.gap_min)
        phases = phases + (lam * a[None, :]) ** 2 * c[:, None] / T
    branch = free[None, :] * np.exp(-1j * phases)

    coeffs = np.zeros((sysm.dim, ptr.dim), dtype=complex)
    coeffs[n] = branch[n] * phi
    distorted = a * phi
    for m in range(sysm.dim):
        if m == n:
            continue
        amp = lam / T * O_eig[m, n] / (E[n] - E[m])
        coeffs[m] = amp * distorted * (branch[n] - branch[m])
    pops = np.sum(np.abs(coeffs) ** 2, axis=1)
    pops[n] = 0.0

    psi = (V @ coeffs).reshape(-1)
    norm = np.linalg.norm(psi)
    state = JointState(Ket(psi / norm), setup.dims)
    return PerturbativeState(state, float(norm - 1.0), pops, validity_indicator(setup))


def evolve_perturbative(setup: ProtectiveSetup) -> JointState:
    return perturbative_expansion(setup).state


def energy_branch_populations(setup: ProtectiveSetup, joint: JointState) -> np.ndarray:
    """Weight of ``joint`` on each eigenstate of ``H_S`` (ascending order)."""
    V = setup.system.eigensystem.eigenvectors
    return np.sum(np.abs(V.conj().T @ joint.block()) ** 2, axis=1)


def pointer_mean(basis: PointerBasis, joint: JointState) -> float:
    """``<1 (x) X>`` of a joint state."""
    c = joint.block()
    val = np.vdot(c, c @ basis.X.matrix.T)
    return float(val.real)


def energy(setup: ProtectiveSetup, joint: JointState, H: HermitianOperator | None = None) -> float:
    H = assemble_hamiltonian(setup) if H is None else H
    return qcore.expectation(H, joint.ket)


def phase_aligned_distance(a: JointState, b: JointState) -> float:
    """``min_theta ||a - exp(i theta) b||``."""
    ov = np.vdot(b.amplitudes, a.amplitudes)
    phase = ov / abs(ov) if abs(ov) > 0 else 1.0
    return float(np.linalg.norm(a.amplitudes - phase * b.amplitudes))


def analyze(setup: ProtectiveSetup) -> EvolutionReport:
    psi = evolve_exact(setup)
    pert = perturbative_expansion(setup)
    ptr = setup.pointer
    mass = check_wraparound(ptr, psi.block(), strict=setup.strict_boundary)

    free_pointer = np.exp(-1j * ptr.spec.mass_inv * ptr.momentum_values**2 * setup.T) \
        * gaussian_pointer(ptr).amplitudes
    x_free = qcore.expectation(ptr.X, free_pointer)
    shift = pointer_mean(ptr, psi) - x_free

    n_ket = setup.system.initial_ket
    rho_S = psi.reduced_system()
    disturbance = 1.0 - qcore.fidelity_pure(n_ket, rho_S)
    return EvolutionReport(
        T=setup.T,
        psi_exact=psi,
        psi_pert=pert.state,
        pointer_shift=shift,
        expectation_target=qcore.expectation(setup.system.O, n_ket),
        disturbance_prob=float(min(max(disturbance, 0.0), 1.0)),
        entropy_bits=qcore.entanglement_entropy(rho_S),
        pert_error=phase_aligned_distance(psi, pert.state),
        validity_indicator=pert.validity_indicator,
        norm_deficit=pert.norm_deficit,
        boundary_mass=mass,
        resolution_ok=setup.resolution_ok,
        rho_S=rho_S,
    )


def protection_hamiltonian(psi, gap: float) -> HermitianOperator:
    """``-gap |psi><psi|``: ``psi`` becomes the unique ground state, gap ``gap`` above it."""
    if not gap > 0:
        raise ValueError(f"protection gap must be positive, got {gap}")
    ket = psi if isinstance(psi, Ket) else Ket(psi)
    return HermitianOperator(-gap * np.outer(ket.amplitudes, ket.amplitudes.conj()))


def dyadic_times(start_exp: int, stop_exp: int, base: float = 1.0) -> list[float]:
    """``base * 2**k`` for ``k = start_exp .. stop_exp`` inclusive."""
    return [base * 2.0**k for k in range(start_exp, stop_exp + 1)]
