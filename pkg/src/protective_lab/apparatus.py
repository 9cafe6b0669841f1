"""Finite pointer model: momentum eigenbasis, conjugate position grid, Gaussian packets.

The pointer lives on a periodic grid of ``d_A`` points. The working basis is
the momentum basis, in which ``P`` and ``H_A = mass_inv * P**2`` are both
diagonal, so they commute exactly. Position and momentum grids are linked
by a unitary DFT::

    a_k = (k - d_A/2) * dp,   dp = 2 p_max / d_A
    x_j = (j - d_A/2) * dx,   dx = pi / p_max
    F[k, j] = exp(-i a_k x_j) / sqrt(d_A)

With this pairing ``exp(-i P dx)`` is an exact one-site circular shift.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .qcore import HermitianOperator, Ket

# Probability mass allowed within BOUNDARY_SITES of the window edge.
WRAP_BUDGET = 1e-6
BOUNDARY_SITES = 2


class PointerConfigError(ValueError):
    """The apparatus description violates one of its geometric bounds."""


class WraparoundWarning(UserWarning):
    pass


class WraparoundError(RuntimeError):
    pass


@dataclass(frozen=True)
class ApparatusSpec:
    d_A: int = 128
    p_max: float = 8.0
    x0: float = 0.0
    sigma: float = 1.0
    mass_inv: float = 0.0

    @property
    def dx(self) -> float:
        return np.pi / self.p_max

    @property
    def window_length(self) -> float:
        return self.d_A * self.dx

    def validate(self) -> None:
        if int(self.d_A) != self.d_A or self.d_A < 8:
            raise PointerConfigError(f"d_A must be an integer >= 8, got {self.d_A}")
        if self.d_A % 2:
            raise PointerConfigError(f"d_A must be even for a symmetric grid, got {self.d_A}")
        if not self.p_max > 0:
            raise PointerConfigError(f"p_max must be positive, got {self.p_max}")
        if self.mass_inv < 0:
            raise PointerConfigError(f"mass_inv must be >= 0, got {self.mass_inv}")
        if not self.sigma > self.dx:
            raise PointerConfigError(
                f"sigma={self.sigma} must exceed the grid spacing dx={self.dx:.6g}")
        _check_fit(self.d_A, self.dx, self.x0, self.sigma)


def _check_fit(d_A: int, dx: float, x0: float, sigma: float) -> None:
    lo, hi = -(d_A // 2) * dx, (d_A // 2 - 1) * dx
    if x0 - 3 * sigma < lo or x0 + 3 * sigma > hi:
        raise PointerConfigError(
            f"wavepacket x0={x0} +/- 3*sigma={3 * sigma} does not fit the position "
            f"window [{lo:.6g}, {hi:.6g}]")


@dataclass(frozen=True, eq=False)
class PointerBasis:
    """Grids and operators of the discretized pointer, in the momentum basis."""

    spec: ApparatusSpec
    momentum_values: np.ndarray
    position_values: np.ndarray
    dft: np.ndarray  # position amplitudes -> momentum amplitudes
    P: HermitianOperator
    X: HermitianOperator
    H_A: HermitianOperator

    @property
    def dim(self) -> int:
        return self.spec.d_A

    @property
    def dx(self) -> float:
        return self.spec.dx

    def to_position(self, amps_p: np.ndarray) -> np.ndarray:
        """Momentum amplitudes -> position amplitudes along the last axis."""
        return amps_p @ self.dft.conj()

    def to_momentum(self, amps_x: np.ndarray) -> np.ndarray:
        return amps_x @ self.dft.T

    def position_ket(self, j: int) -> np.ndarray:
        """Momentum-basis amplitudes of the position eigenstate ``|x_j>``."""
        return self.dft[:, j].copy()


def build_pointer(spec: ApparatusSpec) -> PointerBasis:
    spec.validate()
    d = spec.d_A
    idx = np.arange(d) - d // 2
    a = idx * (2.0 * spec.p_max / d)
    x = idx * spec.dx
    F = np.exp(-1j * np.outer(a, x)) / np.sqrt(d)
    X = (F * x) @ F.conj().T
    for arr in (a, x, F):
        arr.setflags(write=False)
    return PointerBasis(
        spec=spec,
        momentum_values=a,
        position_values=x,
        dft=F,
        P=HermitianOperator(np.diag(a)),
        X=HermitianOperator(X),
        H_A=HermitianOperator(np.diag(spec.mass_inv * a**2)),
    )


def gaussian_pointer(basis: PointerBasis, x0: float | None = None,
                     sigma: float | None = None) -> Ket:
    """Normalized Gaussian ``exp(-(x - x0)^2 / (4 sigma^2))`` in the momentum basis.

    ``x0`` and ``sigma`` default to the values in ``basis.spec``.
    """
    x0 = basis.spec.x0 if x0 is None else x0
    sigma = basis.spec.sigma if sigma is None else sigma
    if not sigma > 0:
        raise PointerConfigError(f"sigma must be positive, got {sigma}")
    _check_fit(basis.dim, basis.dx, x0, sigma)
    amps_x = np.exp(-((basis.position_values - x0) ** 2) / (4.0 * sigma**2))
    amps_x = amps_x / np.linalg.norm(amps_x)
    return Ket.normalized(basis.to_momentum(amps_x))


def boundary_mass(basis: PointerBasis, amps_p: np.ndarray) -> float:
    """Position-probability mass within ``BOUNDARY_SITES`` of the window edge.

    ``amps_p`` may be a pointer ket or a ``(d_S, d_A)`` block of joint amplitudes.
    """
    amps_x = basis.to_position(np.atleast_2d(amps_p))
    prob = np.sum(np.abs(amps_x) ** 2, axis=0)
    k = BOUNDARY_SITES
    return float(prob[:k].sum() + prob[-k:].sum())


def check_wraparound(basis: PointerBasis, amps_p: np.ndarray, strict: bool = False) -> float:
    mass = boundary_mass(basis, amps_p)
    if mass > WRAP_BUDGET:
        msg = f"pointer mass {mass:.3e} near the periodic boundary exceeds {WRAP_BUDGET:g}"
        if strict:
            raise WraparoundError(msg)
        warnings.warn(msg, WraparoundWarning, stacklevel=3)
    return mass


def translate(basis: PointerBasis, psi, delta: float, strict: bool = False) -> Ket:
    """Apply the translation ``exp(-i P delta)``; shifts the packet by ``+delta``."""
    amps = psi.amplitudes if isinstance(psi, Ket) else np.asarray(psi, dtype=complex)
    out = np.exp(-1j * basis.momentum_values * delta) * amps
    check_wraparound(basis, out, strict=strict)
    return Ket(out)
