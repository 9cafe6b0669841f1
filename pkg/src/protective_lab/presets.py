"""Named qubit setups used by the CLI defaults, the tests and the README."""

from __future__ import annotations

from .apparatus import ApparatusSpec
from .protective import ProtectiveSetup, SystemSpec, protection_hamiltonian
from .qcore import SIGMA_X, SIGMA_Z, Ket


def default_qubit(T: float, apparatus: ApparatusSpec | None = None, **kw) -> ProtectiveSetup:
    """``H_S = sigma_z``, ``O = sigma_z + sigma_x``, protected state ``|0>`` (<O> = 1).

    With the default pointer (sigma = 1) the diagonal gap of ``O`` between
    the two levels (2) times the pointer momentum spread (1/2) equals one.
    That cancels the leading ``cos(2T)`` beat in the disturbance probability,
    so dyadic T sweeps follow a clean 1/T^2 law.
    """
    system = SystemSpec(SIGMA_Z, SIGMA_Z + SIGMA_X, n_index=1)
    return ProtectiveSetup(system, apparatus or ApparatusSpec(), T=T, **kw)


def sigma_x_qubit(T: float, apparatus: ApparatusSpec | None = None, **kw) -> ProtectiveSetup:
    """``H_S = sigma_z``, ``O = sigma_x``, protected state ``|0>`` (<O> = 0)."""
    system = SystemSpec(SIGMA_Z, SIGMA_X, n_index=1)
    return ProtectiveSetup(system, apparatus or ApparatusSpec(), T=T, **kw)


def commuting_qubit(T: float, apparatus: ApparatusSpec | None = None, **kw) -> ProtectiveSetup:
    """``H_S = O = sigma_z``: the interaction is a conditional translation."""
    system = SystemSpec(SIGMA_Z, SIGMA_Z, n_index=1)
    return ProtectiveSetup(system, apparatus or ApparatusSpec(), T=T, **kw)


def strong_readout_qubit(T: float, apparatus: ApparatusSpec | None = None, **kw) -> ProtectiveSetup:
    """``O = sigma_z + 5 sigma_x``: disturbance of a few percent at T ~ 6.

    Used for Monte Carlo checks, where 1e4 trials must resolve the disturbed
    fraction. Near T = 6.43 the exact disturbance drops by ~4x when T doubles.
    """
    system = SystemSpec(SIGMA_Z, SIGMA_Z + 5 * SIGMA_X, n_index=1)
    return ProtectiveSetup(system, apparatus or ApparatusSpec(), T=T, **kw)


def projector_qubit(psi, gap: float, O, T: float,
                    apparatus: ApparatusSpec | None = None, **kw) -> ProtectiveSetup:
    ket = psi if isinstance(psi, Ket) else Ket(psi)
    system = SystemSpec(protection_hamiltonian(ket, gap), O, n_index=0)
    return ProtectiveSetup(system, apparatus or ApparatusSpec(), T=T, **kw)
