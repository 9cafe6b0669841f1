"""Numerical laboratory for protective quantum measurement."""

from .apparatus import ApparatusSpec, PointerBasis, build_pointer, gaussian_pointer, translate
from .protective import (EvolutionReport, JointState, ProtectiveSetup, SystemSpec, analyze,
                         assemble_hamiltonian, conditioned_eigensystem, evolve_exact,
                         evolve_perturbative, protection_hamiltonian)
from .qcore import DensityMatrix, EigenSystem, HermitianOperator, Ket

__version__ = "0.1.0"

__all__ = [
    "ApparatusSpec", "PointerBasis", "build_pointer", "gaussian_pointer", "translate",
    "EvolutionReport", "JointState", "ProtectiveSetup", "SystemSpec", "analyze",
    "assemble_hamiltonian", "conditioned_eigensystem", "evolve_exact", "evolve_perturbative",
    "protection_hamiltonian", "DensityMatrix", "EigenSystem", "HermitianOperator", "Ket",
]
